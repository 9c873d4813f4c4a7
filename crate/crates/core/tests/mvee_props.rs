mod common;

use elli::elli::{group_columns, ElliOptions};
use elli::linalg::DenseMatrix;
use elli::mvee::{active_indices, solve_mvee, MveeOptions};
use elli::spa::spa_select;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn gaussian_points(seed: u64, max_k: usize, max_n: usize) -> (DenseMatrix<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=max_k);
    let n = rng.random_range(k + 1..=max_n);
    let p = gaussian_matrix(k, n, &mut rng);
    (p, rng)
}

/// `-log det X` of the best ellipsoid reachable by multiplicative updates
/// `u_i <- u_i g_i / k`, scaled so every point is enclosed.
fn multiplicative_objective(p: &DenseMatrix<f64>, iterations: usize) -> f64 {
    let (k, n) = (p.rows(), p.cols());
    let pts = to_na(p);
    let mut u = DVector::from_element(n, 1.0 / n as f64);
    let mut x = DMatrix::identity(k, k);
    for _ in 0..iterations {
        let m = &pts * DMatrix::from_diagonal(&u) * pts.transpose();
        let minv = m.try_inverse().unwrap();
        let g = DVector::from_fn(n, |i, _| (pts.column(i).transpose() * &minv * pts.column(i))[(0, 0)]);
        x = minv / g.max();
        u.component_mul_assign(&(g / k as f64));
        u /= u.sum();
    }
    -x.determinant().ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certificate_holds(seed in any::<u64>()) {
        let (p, _) = gaussian_points(seed, 6, 120);
        let opts = MveeOptions::default();
        let e = solve_mvee(&p, &opts).unwrap();
        let k = p.rows() as f64;
        let x = to_na(&e.shape);
        let pts = to_na(&p);
        let mut max_lev: f64 = 0.0;
        for i in 0..p.cols() {
            let lev = (pts.column(i).transpose() * &x * pts.column(i))[(0, 0)];
            max_lev = max_lev.max(lev);
            prop_assert!((lev - e.leverage[i]).abs() < 1e-9);
        }
        prop_assert!(max_lev <= 1.0 + opts.epsilon + 1e-12);
        prop_assert!((max_lev - 1.0 - e.epsilon_achieved).abs() < 1e-9);
        let wsum: f64 = e.weights.iter().sum();
        prop_assert!((wsum - 1.0).abs() < 1e-12);
        prop_assert!(e.weights.iter().all(|&w| w >= 0.0));
        // weighted leverages sum to 1 (trace identity) and the support sits
        // on the boundary up to the tolerance
        let wl: f64 = e.weights.iter().zip(&e.leverage).map(|(w, l)| w * l).sum();
        prop_assert!((wl - 1.0).abs() < 1e-6, "sum u_i lev_i = {wl} with k = {k}");
    }

    #[test]
    fn objective_matches_multiplicative_oracle(seed in any::<u64>()) {
        let (p, _) = gaussian_points(seed, 4, 25);
        let e = solve_mvee(&p, &MveeOptions::default()).unwrap();
        let ours = e.objective().unwrap();
        let oracle = multiplicative_objective(&p, 4000);
        let k = p.rows() as f64;
        // the oracle ellipsoid is feasible, so ours can only be smaller
        // (up to the certificate slack), and it converges to the optimum
        prop_assert!(ours <= oracle + k * 1e-6, "ours {ours} oracle {oracle}");
        prop_assert!(oracle - ours < 1e-3, "ours {ours} oracle {oracle}");
    }

    #[test]
    fn rotation_and_scaling_covariance(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let (p, mut rng) = gaussian_points(seed, 5, 80);
        let q = random_orthogonal(p.rows(), &mut rng);
        let qp = q.matmul(&p).unwrap().map(|v| v * scale);
        let opts = MveeOptions::default();
        let a = solve_mvee(&p, &opts).unwrap();
        let b = solve_mvee(&qp, &opts).unwrap();
        // X' = Q X Q^T / scale^2
        let expected = to_na(&q) * to_na(&a.shape) * to_na(&q).transpose() / (scale * scale);
        let got = to_na(&b.shape);
        let rel = (&expected - &got).norm() / expected.norm();
        prop_assert!(rel < 1e-5, "relative shape difference {rel}");
        let la: Vec<usize> = active_indices(&a, &p, 1e-4);
        let lb: Vec<usize> = active_indices(&b, &qp, 1e-4);
        prop_assert_eq!(la, lb);
    }
}

/// Separable `P = W H`: `k` pure columns of `H` are identity columns, the
/// rest lie strictly inside the simplex with norm below 1.
fn separable(seed: u64) -> (DenseMatrix<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=6);
    let extra = rng.random_range(0..40);
    let n = k + extra;
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut h = DenseMatrix::zeros(k, n);
    for (slot, &col) in order.iter().enumerate() {
        if slot < k {
            h[(slot, col)] = 1.0;
        } else {
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            for r in 0..k {
                h[(r, col)] = 0.95 * w[r] / s;
            }
        }
    }
    let w = gaussian_matrix(k, k, &mut rng);
    let mut pure: Vec<usize> = order[..k].to_vec();
    pure.sort_unstable();
    (w.matmul(&h).unwrap(), pure)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spa_recovers_separable_columns(seed in any::<u64>()) {
        let (p, pure) = separable(seed);
        let all: Vec<usize> = (0..p.cols()).collect();
        let mut picked = spa_select(&p, &all, pure.len()).unwrap();
        picked.sort_unstable();
        prop_assert_eq!(picked, pure);
    }

    #[test]
    fn spa_is_rotation_invariant(seed in any::<u64>()) {
        let (p, mut rng) = gaussian_points(seed, 6, 60);
        let k = p.rows();
        let q = random_orthogonal(k, &mut rng);
        let all: Vec<usize> = (0..p.cols()).collect();
        let a = spa_select(&p, &all, k).unwrap();
        let b = spa_select(&q.matmul(&p).unwrap(), &all, k).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn grouping_is_rotation_invariant(seed in any::<u64>()) {
        let (p, mut rng) = gaussian_points(seed, 6, 100);
        let k = p.rows();
        let q = random_orthogonal(k, &mut rng);
        let opts = ElliOptions::default();
        let a = group_columns(&p, k, &opts).unwrap();
        let b = group_columns(&q.matmul(&p).unwrap(), k, &opts).unwrap();
        prop_assert_eq!(&a.representatives, &b.representatives);
        prop_assert_eq!(a.partition.labels(), b.partition.labels());
    }

    #[test]
    fn grouping_returns_k_distinct_claiming_representatives(seed in any::<u64>()) {
        let (p, _) = gaussian_points(seed, 6, 100);
        let k = p.rows();
        let r = group_columns(&p, k, &ElliOptions::default()).unwrap();
        prop_assert_eq!(r.representatives.len(), k);
        for (u, &rep) in r.representatives.iter().enumerate() {
            prop_assert_eq!(r.partition.label(rep), u);
        }
    }
}
