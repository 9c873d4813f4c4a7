//! k-means spectral clustering baseline.
//!
//! The embedding columns are scaled by `1/sqrt(d_l)` (Shi-Malik normalized
//! spectral clustering), seeded with k-means++ and refined by Lloyd
//! iterations. Empty clusters are repaired with the singleton rule: the
//! point farthest from its centroid is moved into a new singleton cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eigen::{bottom_k_eigs_with, EigenOptions, Embedding};
use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, Partition, WeightedGraph};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct KscOptions<T> {
    pub trials: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub eigen: EigenOptions<T>,
}

impl<T: Scalar> Default for KscOptions<T> {
    fn default() -> Self {
        Self { trials: 1, seed: 0, max_iter: 1000, eigen: EigenOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct KscRun<T> {
    pub partition: Partition,
    /// Sum of squared distances to the cluster centroids.
    pub cost: T,
    pub iterations: usize,
    pub seed: u64,
    pub trial: usize,
    /// Objective after every centroid update.
    pub history: Vec<T>,
}

/// The RNG used by trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn sq_dist<T: Scalar>(points: &DenseMatrix<T>, l: usize, c: &[T]) -> T {
    let mut s = T::zero();
    for (r, &cr) in c.iter().enumerate() {
        let d = points[(r, l)] - cr;
        s += d * d;
    }
    s
}

/// k-means++ seeding on the columns of `points`. Returns `k` centers.
///
/// When every remaining squared distance is zero the next center is drawn
/// uniformly, so fewer than `k` distinct points give duplicated centers.
pub fn kmeanspp_seed<T: Scalar, R: Rng + ?Sized>(
    points: &DenseMatrix<T>,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<T>>> {
    let n = points.cols();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let mut centers = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centers.push(points.column(first));
    let mut d2: Vec<f64> = (0..n).map(|l| sq_dist(points, l, &centers[0]).as_f64()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (l, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(l);
                    break;
                }
            }
            // rounding can leave `target` just above the final sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        let c = points.column(pick);
        for (l, w) in d2.iter_mut().enumerate() {
            let d = sq_dist(points, l, &c).as_f64();
            if d < *w {
                *w = d;
            }
        }
        centers.push(c);
    }
    Ok(centers)
}

fn assign<T: Scalar>(points: &DenseMatrix<T>, centers: &[Vec<T>]) -> Vec<usize> {
    (0..points.cols())
        .map(|l| {
            let mut best = 0;
            let mut best_d = sq_dist(points, l, &centers[0]);
            for (u, c) in centers.iter().enumerate().skip(1) {
                let d = sq_dist(points, l, c);
                if d < best_d {
                    best = u;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn centroid<T: Scalar>(points: &DenseMatrix<T>, labels: &[usize], u: usize) -> Vec<T> {
    let dim = points.rows();
    let mut c = vec![T::zero(); dim];
    let mut count = 0usize;
    for (l, &lab) in labels.iter().enumerate() {
        if lab == u {
            count += 1;
            for (r, cr) in c.iter_mut().enumerate() {
                *cr += points[(r, l)];
            }
        }
    }
    let inv = T::one() / T::lit(count as f64);
    c.iter_mut().for_each(|x| *x *= inv);
    c
}

/// Centroids for `labels`, repairing empty clusters in ascending order.
fn update_centroids<T: Scalar>(
    points: &DenseMatrix<T>,
    labels: &mut [usize],
    k: usize,
) -> Vec<Vec<T>> {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut centers: Vec<Vec<T>> =
        (0..k).map(|u| if sizes[u] > 0 { centroid(points, labels, u) } else { Vec::new() }).collect();
    for u in 0..k {
        if sizes[u] > 0 {
            continue;
        }
        let mut far: Option<(usize, T)> = None;
        for (l, &lab) in labels.iter().enumerate() {
            if sizes[lab] < 2 {
                continue;
            }
            let d = sq_dist(points, l, &centers[lab]);
            if far.is_none_or(|(_, fd)| d > fd) {
                far = Some((l, d));
            }
        }
        let (l, _) = far.expect("n >= k leaves a cluster with two or more points");
        let donor = labels[l];
        labels[l] = u;
        sizes[donor] -= 1;
        sizes[u] = 1;
        centers[u] = points.column(l);
        centers[donor] = centroid(points, labels, donor);
    }
    centers
}

fn cost<T: Scalar>(points: &DenseMatrix<T>, labels: &[usize], centers: &[Vec<T>]) -> T {
    labels.iter().enumerate().map(|(l, &u)| sq_dist(points, l, &centers[u])).sum()
}

/// Lloyd iterations from the given centers. Assignment ties go to the
/// lowest cluster index. The returned `seed` and `trial` are zero.
pub fn lloyd<T: Scalar>(
    points: &DenseMatrix<T>,
    k: usize,
    centers: &[Vec<T>],
    max_iter: usize,
) -> Result<KscRun<T>> {
    let n = points.cols();
    if k == 0 || k > n || centers.len() != k {
        return Err(Error::InvalidK { k, n });
    }
    if centers.iter().any(|c| c.len() != points.rows()) {
        return Err(Error::SizeMismatch("center dimension differs from point dimension".into()));
    }
    let mut labels = assign(points, centers);
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        let centers = update_centroids(points, &mut labels, k);
        history.push(cost(points, &labels, &centers));
        let next = assign(points, &centers);
        if next == labels || iterations == max_iter {
            break;
        }
        labels = next;
    }
    Ok(KscRun {
        partition: Partition::new(labels, k)?,
        cost: *history.last().unwrap(),
        iterations,
        seed: 0,
        trial: 0,
        history,
    })
}

/// Scales column `l` of `p` by `1/sqrt(degrees[l])`.
pub fn shi_malik_scale<T: Scalar>(p: &DenseMatrix<T>, degrees: &[T]) -> Result<DenseMatrix<T>> {
    if degrees.len() != p.cols() {
        return Err(Error::SizeMismatch(format!(
            "{} degrees for {} columns",
            degrees.len(),
            p.cols()
        )));
    }
    let s: Vec<T> = degrees.iter().map(|&d| T::one() / d.sqrt()).collect();
    Ok(p.scale_columns(&s))
}

/// Runs `opts.trials` seeded k-means++/Lloyd trials on already scaled points.
pub fn ksc_from_points<T: Scalar>(
    points: &DenseMatrix<T>,
    k: usize,
    opts: &KscOptions<T>,
) -> Result<Vec<KscRun<T>>> {
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(opts.seed, trial);
            let centers = kmeanspp_seed(points, k, &mut rng)?;
            let mut run = lloyd(points, k, &centers, opts.max_iter)?;
            run.seed = opts.seed;
            run.trial = trial;
            Ok(run)
        })
        .collect()
}

/// Embeds once, then runs all trials. Also returns the embedding.
pub fn ksc_cluster_with_embedding<T: Scalar>(
    g: &WeightedGraph<T>,
    k: usize,
    opts: &KscOptions<T>,
) -> Result<(Vec<KscRun<T>>, Embedding<T>)> {
    let n = g.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    let lap = normalized_laplacian(g)?;
    let emb = bottom_k_eigs_with(&lap, k, &opts.eigen)?;
    let runs = ksc_from_embedding(&emb, g.degrees(), opts)?;
    Ok((runs, emb))
}

pub fn ksc_from_embedding<T: Scalar>(
    emb: &Embedding<T>,
    degrees: &[T],
    opts: &KscOptions<T>,
) -> Result<Vec<KscRun<T>>> {
    let points = shi_malik_scale(&emb.p, degrees)?;
    ksc_from_points(&points, emb.k(), opts)
}

pub fn ksc_cluster<T: Scalar>(
    g: &WeightedGraph<T>,
    k: usize,
    opts: &KscOptions<T>,
) -> Result<Vec<KscRun<T>>> {
    ksc_cluster_with_embedding(g, k, opts).map(|(r, _)| r)
}

/// Mean, min and max of a per-trial metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { mean, min, max })
    }
}

/// The lowest-cost run (earliest trial on ties).
pub fn best_run<T: Scalar>(runs: &[KscRun<T>]) -> Option<&KscRun<T>> {
    runs.iter().fold(None, |best: Option<&KscRun<T>>, r| match best {
        Some(b) if b.cost <= r.cost => Some(b),
        _ => Some(r),
    })
}
