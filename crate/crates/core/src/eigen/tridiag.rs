//! Symmetric tridiagonal reduction and selected-eigenpair extraction
//! (Sturm bisection for eigenvalues, inverse iteration for eigenvectors).

use rayon::prelude::*;

use crate::scalar::{dot, norm2, Scalar};

/// `A = Q T Q^T` with `Q` kept as a product of Householder reflectors.
pub(crate) struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
    /// Reflector `j` acts on coordinates `j+1..n`: `H = I - beta v v^T`.
    reflectors: Vec<(Vec<T>, T)>,
}

const PAR_THRESHOLD: usize = 192;

/// Householder reduction of a dense symmetric matrix given row-major in `a`
/// (overwritten).
pub(crate) fn tridiagonalize<T: Scalar>(n: usize, a: &mut [T]) -> Tridiagonal<T> {
    assert_eq!(a.len(), n * n);
    let mut diag = vec![T::zero(); n];
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let two = T::lit(2.0);

    for j in 0..n.saturating_sub(2) {
        let m = n - j - 1;
        let mut v: Vec<T> = (0..m).map(|r| a[(j + 1 + r) * n + j]).collect();
        let xnorm = norm2(&v);
        diag[j] = a[j * n + j];
        if xnorm == T::zero() {
            off[j] = T::zero();
            reflectors.push((v, T::zero()));
            continue;
        }
        let alpha = if v[0] > T::zero() { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        if vtv == T::zero() {
            off[j] = v[0] + alpha;
            reflectors.push((v, T::zero()));
            continue;
        }
        let beta = two / vtv;
        off[j] = alpha;

        // p = beta * A22 v ; w = p - (beta/2)(p.v) v ; A22 -= v w^T + w v^T
        let base = j + 1;
        let row_p = |r: usize, a: &[T]| -> T {
            let row = &a[(base + r) * n + base..(base + r) * n + n];
            beta * dot(row, &v)
        };
        let p: Vec<T> = {
            let a_ro: &[T] = a;
            if m > PAR_THRESHOLD {
                (0..m).into_par_iter().map(|r| row_p(r, a_ro)).collect()
            } else {
                (0..m).map(|r| row_p(r, a_ro)).collect()
            }
        };
        let kfac = beta / two * dot(&p, &v);
        let w: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kfac * vi).collect();
        let update = |r: usize, row: &mut [T]| {
            let (vr, wr) = (v[r], w[r]);
            for (c, x) in row[base..].iter_mut().enumerate() {
                *x -= vr * w[c] + wr * v[c];
            }
        };
        let trailing = &mut a[base * n..];
        if m > PAR_THRESHOLD {
            trailing.par_chunks_mut(n).enumerate().for_each(|(r, row)| update(r, row));
        } else {
            trailing.chunks_mut(n).enumerate().for_each(|(r, row)| update(r, row));
        }
        reflectors.push((v, beta));
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        diag[n - 1] = a[(n - 1) * n + n - 1];
    }
    Tridiagonal { diag, off, reflectors }
}

impl<T: Scalar> Tridiagonal<T> {
    /// Maps an eigenvector of `T` to one of `A`.
    pub fn back_transform(&self, y: &mut [T]) {
        for (j, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == T::zero() {
                continue;
            }
            let tail = &mut y[j + 1..];
            let s = *beta * dot(v, tail);
            for (t, &vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }
}

/// Infinity norm of a symmetric tridiagonal matrix.
pub(crate) fn tridiag_norm<T: Scalar>(diag: &[T], off: &[T]) -> T {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i].abs();
            if i > 0 {
                s += off[i - 1].abs();
            }
            if i + 1 < n {
                s += off[i].abs();
            }
            s
        })
        .fold(T::zero(), T::max)
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count<T: Scalar>(diag: &[T], off: &[T], x: T, pivmin: T) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Smallest `count` eigenvalues of an unreduced block by bisection.
fn bisect_smallest<T: Scalar>(diag: &[T], off: &[T], count: usize, tnorm: T) -> Vec<T> {
    let n = diag.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let mut r = T::zero();
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let eps = T::epsilon();
    let pivmin = T::min_positive_value() * T::lit(1e4) * (T::one() + tnorm * tnorm);
    let atol = eps * tnorm * T::lit(2.0);
    let widen = eps * tnorm * T::lit(4.0) + pivmin;
    lo -= widen;
    hi += widen;
    let half = T::lit(0.5);
    (0..count.min(n))
        .map(|idx| {
            // idx-th eigenvalue (0-based): smallest x with count(x) > idx.
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let tol = atol + eps * T::lit(2.0) * a.abs().max(b.abs());
                if b - a <= tol {
                    break;
                }
                let mid = (a + b) * half;
                if sturm_count(diag, off, mid, pivmin) > idx {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            (a + b) * half
        })
        .collect()
}

/// LU factorization with partial pivoting of `T - shift I` for an unreduced
/// tridiagonal block, then solves in place.
struct ShiftedLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swap: Vec<bool>,
}

impl<T: Scalar> ShiftedLu<T> {
    fn new(diag: &[T], off: &[T], shift: T, pivmin: T) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut d: Vec<T> = diag.iter().map(|&x| x - shift).collect();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = T::zero();
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        for x in d.iter_mut() {
            if x.abs() < pivmin {
                *x = if *x < T::zero() { -pivmin } else { pivmin };
            }
        }
        Self { dl, d, du, du2, swap }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Deterministic pseudo-random vector with entries in `[-0.5, 0.5)`.
pub(crate) fn probe_vector<T: Scalar>(len: usize, seed: u64) -> Vec<T> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    (0..len)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            T::lit((z >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect()
}

/// The `count` smallest eigenpairs of a symmetric tridiagonal matrix, in
/// ascending eigenvalue order. Eigenvectors are unit length, in the
/// tridiagonal basis.
pub(crate) fn smallest_eigenpairs<T: Scalar>(
    diag: &[T],
    off: &[T],
    count: usize,
) -> (Vec<T>, Vec<Vec<T>>) {
    let n = diag.len();
    let tnorm = tridiag_norm(diag, off).max(T::min_positive_value());
    let eps = T::epsilon();
    let split_tol = eps * tnorm;

    // Split into unreduced blocks at negligible off-diagonals.
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..n.saturating_sub(1) {
        if off[i].abs() <= split_tol {
            blocks.push((start, i + 1));
            start = i + 1;
        }
    }
    blocks.push((start, n));

    // (eigenvalue, block index, rank within block)
    let mut candidates: Vec<(T, usize, usize)> = Vec::new();
    for (b, &(lo, hi)) in blocks.iter().enumerate() {
        let off_b = if hi - lo > 1 { &off[lo..hi - 1] } else { &off[0..0] };
        let vals = bisect_smallest(&diag[lo..hi], off_b, count, tnorm);
        candidates.extend(vals.into_iter().enumerate().map(|(r, v)| (v, b, r)));
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then((a.1, a.2).cmp(&(b.1, b.2)))
    });
    candidates.truncate(count);

    // Group the chosen eigenvalues per block, ascending.
    let mut per_block: Vec<Vec<(usize, T)>> = vec![Vec::new(); blocks.len()];
    for (slot, &(v, b, _)) in candidates.iter().enumerate() {
        per_block[b].push((slot, v));
    }

    let lu_floor = eps * tnorm;
    let cluster_gap = T::lit(1e-3) * tnorm;
    let mut vectors: Vec<Vec<T>> = vec![Vec::new(); candidates.len()];
    for (b, chosen) in per_block.iter().enumerate() {
        if chosen.is_empty() {
            continue;
        }
        let (lo, hi) = blocks[b];
        let m = hi - lo;
        let d_b = &diag[lo..hi];
        let off_b = if m > 1 { &off[lo..hi - 1] } else { &off[0..0] };
        let mut local: Vec<(T, Vec<T>)> = Vec::new();
        let mut prev_shift: Option<T> = None;
        for &(slot, value) in chosen {
            let x = if m == 1 {
                vec![T::one()]
            } else {
                let mut shift = value;
                if let Some(p) = prev_shift {
                    let sep = T::lit(10.0) * eps * tnorm.max(value.abs());
                    if shift - p < sep {
                        shift = p + sep;
                    }
                }
                prev_shift = Some(shift);
                let lu = ShiftedLu::new(d_b, off_b, shift, lu_floor);
                let mut x: Vec<T> = probe_vector(m, (lo as u64) << 20 | slot as u64);
                let nx = norm2(&x);
                x.iter_mut().for_each(|v| *v /= nx);
                let cluster: Vec<&Vec<T>> = local
                    .iter()
                    .filter(|(lv, _)| (value - *lv).abs() <= cluster_gap)
                    .map(|(_, v)| v)
                    .collect();
                for _ in 0..6 {
                    lu.solve(&mut x);
                    for _pass in 0..2 {
                        for q in &cluster {
                            let c = dot(q, &x);
                            crate::scalar::axpy(-c, q, &mut x);
                        }
                    }
                    let nx = norm2(&x);
                    if nx == T::zero() || !nx.is_finite() {
                        x = probe_vector(m, (slot as u64) << 32 | 7);
                        continue;
                    }
                    x.iter_mut().for_each(|v| *v /= nx);
                }
                x
            };
            local.push((value, x.clone()));
            let mut full = vec![T::zero(); n];
            full[lo..hi].copy_from_slice(&x);
            vectors[slot] = full;
        }
    }
    (candidates.iter().map(|c| c.0).collect(), vectors)
}
