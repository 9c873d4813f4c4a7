//! Lanczos with full reorthogonalization, locking and restarts.
//!
//! Converged Ritz pairs are locked from the bottom of the spectrum and every
//! later Krylov space is kept orthogonal to them, so repeated eigenvalues
//! (one per connected component, for instance) are found one restart at a
//! time.

use super::tridiag::probe_vector;
use super::EigenOptions;
use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;
use crate::linalg::{symmetric_eigen, DenseMatrix};
use crate::scalar::{axpy, dot, norm2, scale, Scalar};

fn orthogonalize_against<T: Scalar>(x: &mut [T], basis: &[Vec<T>]) {
    for _pass in 0..2 {
        for q in basis {
            let c = dot(q, x);
            axpy(-c, q, x);
        }
    }
}

pub(super) fn smallest<T: Scalar>(
    lap: &NormalizedLaplacian<T>,
    need: usize,
    opts: &EigenOptions<T>,
) -> Result<Vec<Vec<T>>> {
    let n = lap.n();
    let budget = opts.matvecs_per_node.saturating_mul(n).max(4 * need);
    let mut matvecs = 0usize;
    let mut locked: Vec<(T, Vec<T>)> = Vec::new();
    let mut max_steps = (2 * need + 20).max(40).min(n);
    let mut start: Vec<T> = probe_vector(n, 0x1a2b);
    let mut restarts = 0u64;
    let mut last_residual = T::infinity();

    loop {
        let locked_vecs: Vec<Vec<T>> = locked.iter().map(|(_, v)| v.clone()).collect();
        let avail = n - locked.len();
        if avail == 0 {
            break;
        }
        let m_cap = max_steps.min(avail);

        orthogonalize_against(&mut start, &locked_vecs);
        let mut nrm = norm2(&start);
        if nrm <= T::epsilon() {
            restarts += 1;
            start = probe_vector(n, 0x5eed ^ restarts);
            orthogonalize_against(&mut start, &locked_vecs);
            nrm = norm2(&start);
        }
        scale(T::one() / nrm, &mut start);

        let mut basis: Vec<Vec<T>> = vec![start.clone()];
        let mut alpha: Vec<T> = Vec::new();
        let mut beta: Vec<T> = Vec::new();
        let mut w = vec![T::zero(); n];
        let mut invariant = false;
        for j in 0..m_cap {
            lap.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            orthogonalize_against(&mut w, &locked_vecs);
            orthogonalize_against(&mut w, &basis);
            let b = norm2(&w);
            if b <= T::epsilon() * T::lit(16.0) {
                invariant = true;
                beta.push(T::zero());
                break;
            }
            beta.push(b);
            if j + 1 < m_cap {
                let mut next = w.clone();
                scale(T::one() / b, &mut next);
                basis.push(next);
            }
        }
        let m = alpha.len();
        let tmat = DenseMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                T::zero()
            }
        });
        let (theta, y) = symmetric_eigen(&tmat);
        let tail_beta = if invariant { T::zero() } else { beta[m - 1] };
        let ritz_vec = |c: usize| -> Vec<T> {
            let mut x = vec![T::zero(); n];
            for r in 0..m {
                axpy(y[(r, c)], &basis[r], &mut x);
            }
            x
        };

        let threshold_before = locked.len() >= need;
        let max_needed = needed_max(&locked, need);
        let mut newly = 0;
        let mut first_unconverged = None;
        for c in 0..m {
            if locked.len() >= need && theta[c] >= max_needed.unwrap_or(T::infinity()) {
                break;
            }
            let est = (tail_beta * y[(m - 1, c)]).abs();
            if est > opts.tolerance {
                first_unconverged = Some(c);
                last_residual = est;
                break;
            }
            let mut x = ritz_vec(c);
            let all_locked: Vec<Vec<T>> = locked.iter().map(|(_, v)| v.clone()).collect();
            orthogonalize_against(&mut x, &all_locked);
            let xn = norm2(&x);
            if xn <= T::lit(0.5) {
                continue;
            }
            scale(T::one() / xn, &mut x);
            locked.push((theta[c], x));
            newly += 1;
        }
        locked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

        // A run that began with enough locked pairs and found nothing new
        // below them confirms the locked set.
        if threshold_before && newly == 0 {
            let bound = needed_max(&locked, need).unwrap();
            if theta.first().is_none_or(|&t| t >= bound - opts.tolerance) {
                break;
            }
        }

        if matvecs >= budget {
            return Err(Error::NoConvergence {
                what: "Lanczos eigensolver",
                detail: format!(
                    "locked {} of {need} eigenpairs within {budget} matrix-vector products; \
                     achieved residual {:e}",
                    locked.len(),
                    last_residual.as_f64()
                ),
            });
        }

        // Restart from the unconverged bottom of the current Ritz spectrum.
        restarts += 1;
        start = probe_vector(n, 0xabc ^ restarts);
        scale(T::lit(1e-3), &mut start);
        if let Some(c0) = first_unconverged {
            let want = (need.saturating_sub(locked.len())).max(1);
            for c in c0..(c0 + want).min(m) {
                let x = ritz_vec(c);
                axpy(T::one(), &x, &mut start);
            }
        }
        if newly == 0 {
            max_steps = (max_steps * 2).min(n);
        }
    }

    locked.truncate(need);
    if locked.len() < need {
        return Err(Error::NoConvergence {
            what: "Lanczos eigensolver",
            detail: format!("only {} of {need} eigenpairs found", locked.len()),
        });
    }
    Ok(locked.into_iter().map(|(_, v)| v).collect())
}

fn needed_max<T: Scalar>(locked: &[(T, Vec<T>)], need: usize) -> Option<T> {
    if locked.len() < need {
        None
    } else {
        let mut vals: Vec<T> = locked.iter().map(|(t, _)| *t).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Some(vals[need - 1])
    }
}
