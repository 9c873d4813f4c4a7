//! The ELLI clustering pipeline.
//!
//! 1. Embed: bottom-k eigenvectors of the normalized Laplacian, one column
//!    per node.
//! 2. Representatives: the points on the boundary of the origin-centered
//!    minimum-volume enclosing ellipsoid; if there are more than `k`, keep
//!    the `k` chosen by successive projection.
//! 3. Assign every node to the representative whose normalized column has
//!    the largest inner product with its own normalized column.
//!
//! No step is randomized, so equal inputs give equal outputs.

use std::time::Instant;

use crate::eigen::{bottom_k_eigs_with, EigenOptions, Embedding};
use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, Partition, WeightedGraph};
use crate::linalg::DenseMatrix;
use crate::mvee::{active_indices, solve_mvee, MveeOptions};
use crate::scalar::{dot, Scalar};
use crate::spa::spa_select;

#[derive(Debug, Clone)]
pub struct ElliOptions<T> {
    pub eigen: EigenOptions<T>,
    pub mvee: MveeOptions<T>,
    /// A point is active when `p^T X p >= 1 - tau_active`.
    pub tau_active: T,
}

impl<T: Scalar> Default for ElliOptions<T> {
    fn default() -> Self {
        let mvee = MveeOptions::default();
        Self { eigen: EigenOptions::default(), tau_active: mvee.tau_active, mvee }
    }
}

/// How the `k` representatives were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// The active set had exactly `k` members.
    Active,
    /// The active set had more than `k` members and was reduced by SPA.
    ProjectedActive,
    /// The active set was too small (or degenerate); SPA ran on all columns.
    ProjectedAll,
}

#[derive(Debug, Clone, Default)]
pub struct StageTimings {
    pub embedding_s: f64,
    pub ellipsoid_s: f64,
    pub selection_s: f64,
    pub assignment_s: f64,
}

#[derive(Debug, Clone)]
pub struct ElliResult<T> {
    /// Cluster `u` is the one claimed by `representatives[u]`.
    pub partition: Partition,
    pub representatives: Vec<usize>,
    /// Size of the active set before any reduction.
    pub active_count: usize,
    pub selection: Selection,
    pub mvee_iterations: usize,
    pub mvee_epsilon: T,
    pub timings: StageTimings,
}

/// Steps 2 and 3 on a `k x n` embedding.
pub fn group_columns<T: Scalar>(
    p: &DenseMatrix<T>,
    k: usize,
    opts: &ElliOptions<T>,
) -> Result<ElliResult<T>> {
    let n = p.cols();
    if p.rows() != k {
        return Err(Error::SizeMismatch(format!("embedding has {} rows, k = {k}", p.rows())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let norms = p.column_norms();
    let zero = T::tol(1e-12, 16.0);
    if let Some(node) = norms.iter().position(|&v| !(v >= zero)) {
        return Err(Error::ZeroColumn { node });
    }

    let t0 = Instant::now();
    let ellipsoid = solve_mvee(p, &opts.mvee)?;
    let active = if opts.tau_active == opts.mvee.tau_active {
        ellipsoid.active.clone()
    } else {
        active_indices(&ellipsoid, p, opts.tau_active)
    };
    let ellipsoid_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let all: Vec<usize> = (0..n).collect();
    let (representatives, selection) = if active.len() >= k {
        match spa_select(p, &active, k) {
            Ok(reps) if active.len() == k => (reps, Selection::Active),
            Ok(reps) => (reps, Selection::ProjectedActive),
            Err(Error::RankCollapse { .. }) => (spa_select(p, &all, k)?, Selection::ProjectedAll),
            Err(e) => return Err(e),
        }
    } else {
        (spa_select(p, &all, k)?, Selection::ProjectedAll)
    };
    let selection_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let unit: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut c = p.column(j);
            let s = T::one() / norms[j];
            c.iter_mut().for_each(|x| *x *= s);
            c
        })
        .collect();
    let reps_unit: Vec<&Vec<T>> = representatives.iter().map(|&r| &unit[r]).collect();
    let mut labels: Vec<usize> = unit
        .iter()
        .map(|col| {
            let mut best = 0;
            let mut best_val = dot(reps_unit[0], col);
            for (u, rep) in reps_unit.iter().enumerate().skip(1) {
                let v = dot(rep, col);
                if v > best_val {
                    best = u;
                    best_val = v;
                }
            }
            best
        })
        .collect();
    for (u, &r) in representatives.iter().enumerate() {
        labels[r] = u;
    }
    let partition = Partition::new(labels, k)?;
    let assignment_s = t2.elapsed().as_secs_f64();

    Ok(ElliResult {
        partition,
        representatives,
        active_count: active.len(),
        selection,
        mvee_iterations: ellipsoid.iterations,
        mvee_epsilon: ellipsoid.epsilon_achieved,
        timings: StageTimings { embedding_s: 0.0, ellipsoid_s, selection_s, assignment_s },
    })
}

/// Full pipeline on a graph. Also returns the embedding it computed.
pub fn elli_cluster_with_embedding<T: Scalar>(
    g: &WeightedGraph<T>,
    k: usize,
    opts: &ElliOptions<T>,
) -> Result<(ElliResult<T>, Embedding<T>)> {
    let n = g.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    let t0 = Instant::now();
    let lap = normalized_laplacian(g)?;
    let emb = bottom_k_eigs_with(&lap, k, &opts.eigen)?;
    let embedding_s = t0.elapsed().as_secs_f64();
    let mut res = group_columns(&emb.p, k, opts)?;
    res.timings.embedding_s = embedding_s;
    Ok((res, emb))
}

pub fn elli_cluster<T: Scalar>(
    g: &WeightedGraph<T>,
    k: usize,
    opts: &ElliOptions<T>,
) -> Result<ElliResult<T>> {
    elli_cluster_with_embedding(g, k, opts).map(|(r, _)| r)
}
