//! Shared generators and reference computations for integration tests.
#![allow(dead_code)]

use elli::graph::{Partition, WeightedGraph};
use elli::linalg::DenseMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-ish random orthogonal matrix from the QR factorization of a
/// Gaussian matrix.
pub fn random_orthogonal<R: Rng>(k: usize, rng: &mut R) -> DenseMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(k, k, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // fix column signs so the distribution does not depend on QR conventions
    DenseMatrix::from_fn(k, k, |i, j| if r[(j, j)] < 0.0 { -q[(i, j)] } else { q[(i, j)] })
}

pub fn to_na(m: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn spectral_norm(m: &DenseMatrix<f64>) -> f64 {
    to_na(m).svd(false, false).singular_values.max()
}

/// Connected random weighted graph: a random spanning path plus
/// Erdos-Renyi extras, weights uniform in (0.1, 1].
pub fn random_connected_graph<R: Rng>(n: usize, p_edge: f64, rng: &mut R) -> WeightedGraph<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut edges = Vec::new();
    for w in order.windows(2) {
        edges.push((w[0], w[1], rng.random_range(0.1..=1.0)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p_edge {
                edges.push((i, j, rng.random_range(0.1..=1.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

/// Uniform random labels in `0..k` with every label used.
pub fn random_partition<R: Rng>(n: usize, k: usize, rng: &mut R) -> Partition {
    assert!(k <= n);
    let mut labels: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    Partition::new(labels, k).unwrap()
}

/// Dense normalized Laplacian built straight from the adjacency.
pub fn reference_laplacian(g: &WeightedGraph<f64>) -> DMatrix<f64> {
    let w = g.to_dense();
    let n = g.n();
    let d: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w[(i, j)]).sum()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - w[(i, j)] / (d[i] * d[j]).sqrt()
    })
}

/// Ascending eigenvalues and matching eigenvectors (as columns).
pub fn reference_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..a.nrows()).collect();
    idx.sort_by(|&x, &y| se.eigenvalues[x].partial_cmp(&se.eigenvalues[y]).unwrap());
    let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| se.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Sine of the largest principal angle between the column spaces of two
/// matrices with orthonormal columns.
pub fn max_principal_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let proj = b * (b.transpose() * a);
    (a - proj).svd(false, false).singular_values.max()
}

/// Conductance of every cluster from the dense adjacency, by definition.
pub fn reference_conductances(g: &WeightedGraph<f64>, p: &Partition) -> Vec<f64> {
    let w = g.to_dense();
    let n = g.n();
    (0..p.k())
        .map(|c| {
            let mut cut = 0.0;
            let mut vol = 0.0;
            for i in 0..n {
                if p.label(i) != c {
                    continue;
                }
                for j in 0..n {
                    vol += w[(i, j)];
                    if p.label(j) != c {
                        cut += w[(i, j)];
                    }
                }
            }
            cut / vol
        })
        .collect()
}

/// All permutations of `0..k` (Heap's algorithm).
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(n: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, a, out);
            if n % 2 == 0 {
                a.swap(i, n - 1);
            } else {
                a.swap(0, n - 1);
            }
        }
        heap(n - 1, a, out);
    }
    let mut a: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    heap(k, &mut a, &mut out);
    out
}

pub fn brute_force_accuracy(c: &Partition, t: &Partition) -> f64 {
    let k = c.k();
    let n = c.n();
    permutations(k)
        .iter()
        .map(|sigma| (0..n).filter(|&v| sigma[c.label(v)] == t.label(v)).count())
        .max()
        .unwrap() as f64
        / n as f64
}

/// NMI from the probabilities of the joint and marginal label distributions.
pub fn brute_force_nmi(c: &Partition, t: &Partition) -> f64 {
    let n = c.n() as f64;
    let pc: Vec<f64> = (0..c.k()).map(|u| c.labels().iter().filter(|&&l| l == u).count() as f64 / n).collect();
    let pt: Vec<f64> = (0..t.k()).map(|v| t.labels().iter().filter(|&&l| l == v).count() as f64 / n).collect();
    let h = |p: &[f64]| -> f64 { p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum() };
    let mut mi = 0.0;
    for u in 0..c.k() {
        for v in 0..t.k() {
            let puv = (0..c.n()).filter(|&i| c.label(i) == u && t.label(i) == v).count() as f64 / n;
            if puv > 0.0 {
                mi += puv * (puv / (pc[u] * pt[v])).ln();
            }
        }
    }
    let denom = h(&pc) + h(&pt);
    if denom == 0.0 {
        1.0
    } else {
        2.0 * mi / denom
    }
}

/// Groups labels by cluster membership so that two partitions with the
/// same clusters compare equal regardless of numbering.
pub fn canonical(p: &Partition) -> Vec<usize> {
    let mut map = vec![usize::MAX; p.k()];
    let mut next = 0;
    p.labels()
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect()
}
