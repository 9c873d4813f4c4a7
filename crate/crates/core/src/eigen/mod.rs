//! Bottom eigenpairs of the normalized Laplacian: the spectral embedding.
//!
//! Small problems (n up to [`EigenOptions::dense_max_n`]) are reduced to
//! tridiagonal form densely; the requested eigenvalues are isolated by Sturm
//! bisection and their vectors obtained by inverse iteration. Larger problems
//! run Lanczos with full reorthogonalization and locking. Both paths finish
//! with a Rayleigh-Ritz pass on the sparse operator, so the reported residuals
//! are measured against the Laplacian itself.

mod lanczos;
mod tridiag;

use crate::error::{Error, Result};
use crate::graph::{NormalizedLaplacian, PartitionProfile};
use crate::linalg::{orthonormalize_columns, symmetric_eigen, DenseMatrix};
use crate::scalar::{norm2, Scalar};

#[derive(Debug, Clone)]
pub struct EigenOptions<T> {
    /// Residual at which a Lanczos Ritz pair counts as converged.
    pub tolerance: T,
    /// Largest final residual `||L f - lambda f||` accepted.
    pub max_residual: T,
    /// Problems up to this size use the dense path.
    pub dense_max_n: usize,
    /// Lanczos budget, in matrix-vector products per node.
    pub matvecs_per_node: usize,
}

impl<T: Scalar> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::tol(1e-10, 1e3),
            max_residual: T::tol(1e-8, 1e4),
            dense_max_n: 2048,
            matvecs_per_node: 50,
        }
    }
}

/// Rows of `p` are the bottom-k eigenvectors; column `l` embeds node `l`.
#[derive(Debug, Clone)]
pub struct Embedding<T> {
    pub p: DenseMatrix<T>,
    /// `lambda_1 <= ... <= lambda_k`
    pub eigenvalues: Vec<T>,
    /// `lambda_{k+1}`
    pub lambda_next: T,
    /// `||L f_i - lambda_i f_i||` for each row.
    pub residuals: Vec<T>,
}

impl<T: Scalar> Embedding<T> {
    /// Wraps an arbitrary `k x n` point matrix (no spectral metadata).
    pub fn from_points(p: DenseMatrix<T>) -> Self {
        let k = p.rows();
        Self {
            p,
            eigenvalues: vec![T::nan(); k],
            lambda_next: T::nan(),
            residuals: vec![T::nan(); k],
        }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.p.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.cols()
    }

    pub fn column(&self, l: usize) -> Vec<T> {
        self.p.column(l)
    }
}

/// Bottom `k` eigenpairs of `lap` (plus `lambda_{k+1}`) with default options.
pub fn bottom_k_eigs<T: Scalar>(lap: &NormalizedLaplacian<T>, k: usize) -> Result<Embedding<T>> {
    bottom_k_eigs_with(lap, k, &EigenOptions::default())
}

pub fn bottom_k_eigs_with<T: Scalar>(
    lap: &NormalizedLaplacian<T>,
    k: usize,
    opts: &EigenOptions<T>,
) -> Result<Embedding<T>> {
    let n = lap.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    let need = k + 1;
    let vectors = if n <= opts.dense_max_n {
        dense_smallest(lap, need)
    } else {
        lanczos::smallest(lap, need, opts)?
    };
    let (values, mut vectors, residuals) = rayleigh_ritz(lap, vectors)?;
    let worst = residuals.iter().copied().fold(T::zero(), T::max);
    if !(worst <= opts.max_residual) {
        return Err(Error::NoConvergence {
            what: "eigensolver",
            detail: format!("achieved residual {:e}", worst.as_f64()),
        });
    }
    for v in vectors.iter_mut() {
        fix_sign(v);
    }
    let p = DenseMatrix::from_fn(k, n, |i, j| vectors[i][j]);
    Ok(Embedding {
        p,
        eigenvalues: values[..k].to_vec(),
        lambda_next: values[k],
        residuals: residuals[..k].to_vec(),
    })
}

fn dense_smallest<T: Scalar>(lap: &NormalizedLaplacian<T>, need: usize) -> Vec<Vec<T>> {
    let n = lap.n();
    let dense = lap.to_dense();
    let mut a = dense.as_slice().to_vec();
    let tri = tridiag::tridiagonalize(n, &mut a);
    drop(a);
    let (_, mut vecs) = tridiag::smallest_eigenpairs(&tri.diag, &tri.off, need);
    for v in vecs.iter_mut() {
        tri.back_transform(v);
    }
    vecs
}

/// Rayleigh-Ritz on `span(vectors)`: returns ascending Ritz values, Ritz
/// vectors and true residual norms.
fn rayleigh_ritz<T: Scalar>(
    lap: &NormalizedLaplacian<T>,
    mut vectors: Vec<Vec<T>>,
) -> Result<(Vec<T>, Vec<Vec<T>>, Vec<T>)> {
    let m = vectors.len();
    let n = lap.n();
    let dropped = orthonormalize_columns(&mut vectors);
    if dropped > 0 {
        return Err(Error::NoConvergence {
            what: "eigensolver",
            detail: format!("{dropped} of {m} eigenvector estimates were linearly dependent"),
        });
    }
    let lv: Vec<Vec<T>> = vectors.iter().map(|v| lap.mul(v)).collect();
    let h = DenseMatrix::from_fn(m, m, |i, j| {
        let a = crate::scalar::dot(&vectors[i], &lv[j]);
        let b = crate::scalar::dot(&vectors[j], &lv[i]);
        (a + b) * T::lit(0.5)
    });
    let (theta, y) = symmetric_eigen(&h);
    let mut ritz = Vec::with_capacity(m);
    let mut residuals = Vec::with_capacity(m);
    for c in 0..m {
        let mut x = vec![T::zero(); n];
        let mut lx = vec![T::zero(); n];
        for r in 0..m {
            let w = y[(r, c)];
            crate::scalar::axpy(w, &vectors[r], &mut x);
            crate::scalar::axpy(w, &lv[r], &mut lx);
        }
        let res: Vec<T> = lx.iter().zip(&x).map(|(&a, &b)| a - theta[c] * b).collect();
        residuals.push(norm2(&res));
        ritz.push(x);
    }
    Ok((theta, ritz, residuals))
}

/// Makes the entry of largest magnitude positive (lowest index on ties).
fn fix_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// How well separated a partition looks relative to the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDiagnostics<T> {
    pub lambda_next: T,
    pub mcc: T,
    /// `lambda_{k+1} / MCC`; `+inf` when the partition has zero MCC.
    pub ratio: T,
}

/// `lambda_{k+1} / MCC`, a computable lower-bound proxy for the gap
/// parameter (any partition's MCC upper-bounds the graph conductance).
pub fn gap_diagnostics<T: Scalar>(
    emb: &Embedding<T>,
    profile: &PartitionProfile<T>,
) -> GapDiagnostics<T> {
    let ratio = if profile.mcc == T::zero() {
        T::infinity()
    } else {
        emb.lambda_next / profile.mcc
    };
    GapDiagnostics { lambda_next: emb.lambda_next, mcc: profile.mcc, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalized_laplacian, partition_profile, Partition, WeightedGraph};

    #[test]
    fn two_node_path() {
        let g = WeightedGraph::<f64>::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let lap = normalized_laplacian(&g).unwrap();
        let emb = bottom_k_eigs(&lap, 1).unwrap();
        assert!(emb.eigenvalues[0].abs() < 1e-14);
        assert!((emb.lambda_next - 2.0).abs() < 1e-14);
        let f = emb.column(0);
        assert!((emb.p[(0, 0)] - emb.p[(0, 1)]).abs() < 1e-14);
        assert!((f[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn k_must_be_below_n() {
        let g = WeightedGraph::<f64>::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let lap = normalized_laplacian(&g).unwrap();
        assert!(matches!(bottom_k_eigs(&lap, 2), Err(Error::InvalidK { k: 2, n: 2 })));
        assert!(matches!(bottom_k_eigs(&lap, 0), Err(Error::InvalidK { .. })));
    }

    fn cliques(k: usize, size: usize) -> WeightedGraph<f64> {
        let mut edges = Vec::new();
        for c in 0..k {
            for i in 0..size {
                for j in i + 1..size {
                    edges.push((c * size + i, c * size + j, 1.0 + ((i + j) % 3) as f64));
                }
            }
        }
        WeightedGraph::<f64>::from_edges(k * size, edges).unwrap()
    }

    #[test]
    fn disjoint_cliques_have_k_zero_eigenvalues() {
        let g = cliques(4, 6);
        let lap = normalized_laplacian(&g).unwrap();
        let emb = bottom_k_eigs(&lap, 4).unwrap();
        for &l in &emb.eigenvalues {
            assert!(l.abs() < 1e-12, "{l}");
        }
        assert!(emb.lambda_next > 0.5);
        let forced = EigenOptions { dense_max_n: 0, ..EigenOptions::default() };
        let emb2 = bottom_k_eigs_with(&lap, 4, &forced).unwrap();
        for &l in &emb2.eigenvalues {
            assert!(l.abs() < 1e-10, "{l}");
        }
        assert!((emb2.lambda_next - emb.lambda_next).abs() < 1e-9);
    }

    #[test]
    fn four_cycle_gap_ratio() {
        let g = WeightedGraph::<f64>::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
            .unwrap();
        let lap = normalized_laplacian(&g).unwrap();
        let emb = bottom_k_eigs(&lap, 2).unwrap();
        // 4-cycle normalized Laplacian spectrum: {0, 1, 1, 2}
        assert!((emb.eigenvalues[1] - 1.0).abs() < 1e-13);
        assert!((emb.lambda_next - 1.0).abs() < 1e-13);
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let prof = partition_profile(&g, &p).unwrap();
        let gap = gap_diagnostics(&emb, &prof);
        assert!((gap.ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mcc_gives_infinite_ratio() {
        let g = cliques(2, 4);
        let lap = normalized_laplacian(&g).unwrap();
        let emb = bottom_k_eigs(&lap, 2).unwrap();
        let truth = Partition::new((0..8).map(|v| v / 4).collect(), 2).unwrap();
        let prof = partition_profile(&g, &truth).unwrap();
        assert!(gap_diagnostics(&emb, &prof).ratio.is_infinite());
    }
}
