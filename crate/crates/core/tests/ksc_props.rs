mod common;

use elli::graph::{normalized_laplacian, WeightedGraph};
use elli::eigen::bottom_k_eigs;
use elli::ksc::{kmeanspp_seed, ksc_from_embedding, ksc_from_points, lloyd, trial_rng, KscOptions};
use elli::linalg::DenseMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn cloud(seed: u64) -> (DenseMatrix<f64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..5);
    let n = rng.random_range(4..120);
    let k = rng.random_range(1..=n.min(7));
    (gaussian_matrix(d, n, &mut rng), k)
}

fn cost_of(points: &DenseMatrix<f64>, labels: &[usize], k: usize) -> f64 {
    let d = points.rows();
    let mut sum = vec![vec![0.0; d]; k];
    let mut count = vec![0usize; k];
    for (l, &c) in labels.iter().enumerate() {
        count[c] += 1;
        for r in 0..d {
            sum[c][r] += points[(r, l)];
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(l, &c)| (0..d).map(|r| (points[(r, l)] - sum[c][r] / count[c] as f64).powi(2)).sum::<f64>())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lloyd_objective_never_increases(seed in any::<u64>()) {
        let (p, k) = cloud(seed);
        let mut rng = trial_rng(seed, 0);
        let centers = kmeanspp_seed(&p, k, &mut rng).unwrap();
        let run = lloyd(&p, k, &centers, 1000).unwrap();
        for w in run.history.windows(2) {
            prop_assert!(w[1] <= w[0], "history {:?}", run.history);
        }
        prop_assert!((run.cost - cost_of(&p, run.partition.labels(), k)).abs() <= 1e-10 * (1.0 + run.cost));
        prop_assert_eq!(run.partition.sizes().iter().filter(|&&s| s == 0).count(), 0);
    }

    #[test]
    fn trials_are_reproducible(seed in any::<u64>()) {
        let (p, k) = cloud(seed);
        let opts = KscOptions { trials: 3, seed, ..KscOptions::default() };
        let a = ksc_from_points(&p, k, &opts).unwrap();
        let b = ksc_from_points(&p, k, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.partition.labels(), y.partition.labels());
            prop_assert_eq!(x.cost.to_bits(), y.cost.to_bits());
            prop_assert_eq!(x.iterations, y.iterations);
        }
    }

    #[test]
    fn power_of_two_scaling_changes_nothing_but_the_cost(seed in any::<u64>(), e in -6i32..6) {
        let (p, k) = cloud(seed);
        let s = 2f64.powi(e);
        let opts = KscOptions { trials: 2, seed, ..KscOptions::default() };
        let a = ksc_from_points(&p, k, &opts).unwrap();
        let b = ksc_from_points(&p.map(|v| v * s), k, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.partition.labels(), y.partition.labels());
            prop_assert_eq!(x.cost * s * s, y.cost);
        }
    }
}

/// Four-regular circulant graph: node `i` links to `i +- 1` and `i +- 2`.
fn circulant(n: usize) -> WeightedGraph<f64> {
    let edges = (0..n).flat_map(|i| [(i, (i + 1) % n, 1.0), (i, (i + 2) % n, 1.0)]);
    WeightedGraph::from_edges(n, edges).unwrap()
}

#[test]
fn regular_graph_scaling_is_uniform() {
    let g = circulant(24);
    let lap = normalized_laplacian(&g).unwrap();
    let emb = bottom_k_eigs(&lap, 3).unwrap();
    let opts = KscOptions { trials: 4, seed: 9, ..KscOptions::default() };
    let scaled = ksc_from_embedding(&emb, g.degrees(), &opts).unwrap();
    let plain = ksc_from_points(&emb.p, 3, &opts).unwrap();
    for (a, b) in scaled.iter().zip(&plain) {
        assert_eq!(a.partition.labels(), b.partition.labels());
        assert_eq!(a.cost * 4.0, b.cost);
    }
}

#[test]
fn seeding_follows_the_squared_distance_law() {
    let xs: [f64; 5] = [0.0, 1.0, 3.0, 7.0, 12.0];
    let n = xs.len();
    let p = DenseMatrix::from_fn(1, n, |_, l| xs[l]);
    // exact probability of the ordered pair (first, second)
    let mut exact = vec![vec![0.0; n]; n];
    for i in 0..n {
        let d2: Vec<f64> = xs.iter().map(|x| (x - xs[i]).powi(2)).collect();
        let total: f64 = d2.iter().sum();
        for j in 0..n {
            exact[i][j] = d2[j] / total / n as f64;
        }
    }
    let draws = 10_000;
    let mut counts = vec![vec![0usize; n]; n];
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for _ in 0..draws {
        let c = kmeanspp_seed(&p, 2, &mut rng).unwrap();
        let i = xs.iter().position(|&x| x == c[0][0]).unwrap();
        let j = xs.iter().position(|&x| x == c[1][0]).unwrap();
        counts[i][j] += 1;
    }
    let mut chi2 = 0.0;
    for i in 0..n {
        assert_eq!(counts[i][i], 0);
        for j in 0..n {
            if i != j {
                let e = exact[i][j] * draws as f64;
                chi2 += (counts[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    // 19 degrees of freedom; the 99.9% quantile is 43.8
    assert!(chi2 < 43.8, "chi-square {chi2}");
}

#[test]
fn identical_points_fall_back_to_uniform_draws() {
    let p = DenseMatrix::from_fn(2, 6, |r, _| r as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = kmeanspp_seed(&p, 3, &mut rng).unwrap();
    assert_eq!(c.len(), 3);
    let run = lloyd(&p, 3, &c, 100).unwrap();
    assert_eq!(run.cost, 0.0);
    assert!(run.partition.sizes().iter().all(|&s| s > 0));
}

#[test]
fn trial_streams_differ() {
    let a: u64 = trial_rng(5, 0).random();
    let b: u64 = trial_rng(5, 1).random();
    assert_ne!(a, b);
}
