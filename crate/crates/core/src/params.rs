//! Degree parameters of a partition: `alpha_{i,j} = sqrt(d_{i,j} / mu(S_i))`
//! and `theta_{i,j} = alpha_{i,j} / alpha_i*`, where `alpha_i*` belongs to
//! the node of largest degree in cluster `i` (its representative).
//!
//! These describe when the grouping stage is guaranteed to succeed and are
//! used to build test instances; the clustering algorithms never read them.

use crate::error::{Error, Result};
use crate::graph::Partition;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// `17 - 12 sqrt(2)`, about 0.0294.
pub fn assignment_constant<T: Scalar>() -> T {
    T::lit(17.0) - T::lit(12.0) * T::lit(2.0).sqrt()
}

#[derive(Debug, Clone)]
pub struct DegreeParameters<T> {
    /// `alpha` of every node within its own cluster.
    pub alpha: Vec<T>,
    /// `theta` of every node; 1 for representatives.
    pub theta: Vec<T>,
    /// Largest-degree node of each cluster (lowest index on ties).
    pub representatives: Vec<usize>,
    /// `alpha_i*` per cluster.
    pub alpha_star: Vec<T>,
    pub alpha_min: T,
    pub alpha_star_min: T,
    /// Extremes of `theta` over non-representative nodes; `None` when every
    /// cluster is a singleton.
    pub theta_min: Option<T>,
    pub theta_max: Option<T>,
}

impl<T: Scalar> DegreeParameters<T> {
    pub fn new(degrees: &[T], partition: &Partition) -> Result<Self> {
        let n = degrees.len();
        if partition.n() != n {
            return Err(Error::SizeMismatch(format!(
                "{n} degrees for a partition of {} nodes",
                partition.n()
            )));
        }
        if let Some(node) = degrees.iter().position(|&d| !(d > T::zero())) {
            return Err(Error::ZeroDegree { node });
        }
        let clusters = partition.clusters();
        let mut alpha = vec![T::zero(); n];
        let mut theta = vec![T::zero(); n];
        let mut representatives = Vec::with_capacity(clusters.len());
        let mut alpha_star = Vec::with_capacity(clusters.len());
        let mut theta_min: Option<T> = None;
        let mut theta_max: Option<T> = None;
        for members in &clusters {
            let mu: T = members.iter().map(|&v| degrees[v]).sum();
            let rep = members.iter().copied().fold(members[0], |best, v| {
                if degrees[v] > degrees[best] {
                    v
                } else {
                    best
                }
            });
            let a_star = (degrees[rep] / mu).sqrt();
            for &v in members {
                alpha[v] = (degrees[v] / mu).sqrt();
                theta[v] = alpha[v] / a_star;
                if v != rep {
                    theta_min = Some(theta_min.map_or(theta[v], |t| t.min(theta[v])));
                    theta_max = Some(theta_max.map_or(theta[v], |t| t.max(theta[v])));
                }
            }
            theta[rep] = T::one();
            representatives.push(rep);
            alpha_star.push(a_star);
        }
        let alpha_min = alpha.iter().copied().fold(T::infinity(), T::min);
        let alpha_star_min = alpha_star.iter().copied().fold(T::infinity(), T::min);
        Ok(Self {
            alpha,
            theta,
            representatives,
            alpha_star,
            alpha_min,
            alpha_star_min,
            theta_min,
            theta_max,
        })
    }

    /// `1/2 (1 - theta_max) alpha*_min`: below this residual norm the
    /// ellipsoid's active points are exactly the representatives.
    pub fn active_set_threshold(&self) -> T {
        let tm = self.theta_max.unwrap_or(T::zero());
        T::lit(0.5) * (T::one() - tm) * self.alpha_star_min
    }

    /// `(17 - 12 sqrt 2) alpha_min`: below this per-column residual norm every
    /// node is assigned to its own cluster's representative.
    pub fn assignment_threshold(&self) -> T {
        assignment_constant::<T>() * self.alpha_min
    }

    /// `min{1/2 (1 - theta_max), (17 - 12 sqrt 2) theta_min}`.
    pub fn theta_param(&self) -> T {
        let a = T::lit(0.5) * (T::one() - self.theta_max.unwrap_or(T::zero()));
        let b = assignment_constant::<T>() * self.theta_min.unwrap_or(T::one());
        a.min(b)
    }

    /// `4k / (theta alpha*_min)^2`; infinite when `theta` is zero.
    pub fn gap_threshold(&self) -> T {
        let k = T::lit(self.alpha_star.len() as f64);
        let ta = self.theta_param() * self.alpha_star_min;
        T::lit(4.0) * k / (ta * ta)
    }

    /// The noise-free embedding: column `v` is `alpha_v e_{label(v)}`.
    pub fn ideal_embedding(&self, partition: &Partition) -> DenseMatrix<T> {
        DenseMatrix::from_fn(partition.k(), partition.n(), |i, v| {
            if partition.label(v) == i {
                self.alpha[v]
            } else {
                T::zero()
            }
        })
    }
}
