//! Origin-centered minimum-volume enclosing ellipsoid.
//!
//! For points `p_1..p_n` spanning `R^k` the ellipsoid `{a : a^T X a <= 1}` of
//! least volume solves `min -log det X  s.t.  p_i^T X p_i <= 1`. Its dual is
//! the D-optimal design problem `max log det M(u)` over the unit simplex with
//! `M(u) = sum u_i p_i p_i^T`, and the two are linked by `X = M(u)^{-1} / k`.
//!
//! The dual is solved by Frank-Wolfe with Khachiyan's exact line search on
//! the toward step and Todd-Yildirim away steps, which let interior points
//! leave the support in finitely many iterations. Each periodic refactor is
//! followed by a few Newton steps on the current support, which fixes the
//! weights quickly once the support is right. Optimality is certified by
//! `max_i p_i^T M(u)^{-1} p_i <= (1 + eps) k`.

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, spd_log_det, DenseMatrix};
use crate::scalar::{dot, Scalar};
use crate::spa::spa_select;

#[derive(Debug, Clone)]
pub struct MveeOptions<T> {
    /// Relative optimality `eps` of the certificate.
    pub epsilon: T,
    /// Boundary tolerance used to fill [`Ellipsoid::active`].
    pub tau_active: T,
    /// Iteration cap; `None` means `ceil(100 k max(ln n, 1))`.
    pub max_iterations: Option<usize>,
    /// Rebuild `M(u)^{-1}` from scratch this often.
    pub refactor_every: usize,
}

impl<T: Scalar> Default for MveeOptions<T> {
    fn default() -> Self {
        Self {
            epsilon: T::tol(1e-7, 64.0),
            tau_active: T::tol(1e-5, 256.0),
            max_iterations: None,
            refactor_every: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ellipsoid<T> {
    /// Shape matrix `X` (symmetric positive definite, `k x k`).
    pub shape: DenseMatrix<T>,
    /// Dual weights `u` on the unit simplex.
    pub weights: Vec<T>,
    /// `p_i^T X p_i` for every input point.
    pub leverage: Vec<T>,
    /// `max_i p_i^T X p_i - 1` at termination.
    pub epsilon_achieved: T,
    /// Indices with `p_i^T X p_i >= 1 - tau_active`, ascending.
    pub active: Vec<usize>,
    pub iterations: usize,
}

impl<T: Scalar> Ellipsoid<T> {
    /// `-log det X`, the primal objective.
    pub fn objective(&self) -> Result<T> {
        Ok(-spd_log_det(&self.shape)?)
    }
}

struct DualState<T> {
    k: usize,
    /// Points stored contiguously, point `i` at `pts[i*k..(i+1)*k]`.
    pts: Vec<T>,
    u: Vec<T>,
    minv: DenseMatrix<T>,
    g: Vec<T>,
}

impl<T: Scalar> DualState<T> {
    fn point(&self, i: usize) -> &[T] {
        &self.pts[i * self.k..(i + 1) * self.k]
    }

    fn n(&self) -> usize {
        self.u.len()
    }

    fn refactor(&mut self) -> Result<()> {
        let k = self.k;
        let mut m = DenseMatrix::zeros(k, k);
        for i in 0..self.n() {
            let ui = self.u[i];
            if ui == T::zero() {
                continue;
            }
            let p = &self.pts[i * k..(i + 1) * k];
            for r in 0..k {
                let s = ui * p[r];
                for c in 0..=r {
                    m[(r, c)] += s * p[c];
                }
            }
        }
        for r in 0..k {
            for c in 0..r {
                m[(c, r)] = m[(r, c)];
            }
        }
        self.minv = spd_inverse(&m)?;
        for i in 0..self.n() {
            let a = self.minv.matvec(self.point(i));
            self.g[i] = dot(self.point(i), &a);
        }
        Ok(())
    }

    /// `M <- (1 - beta) M + beta p_j p_j^T` (toward) or
    /// `M <- (1 + beta) M - beta p_j p_j^T` (away, `sign = -1`).
    fn rank_one(&mut self, j: usize, beta: T, toward: bool) {
        let a = self.minv.matvec(self.point(j));
        let gj = self.g[j];
        let (scale, coef) = if toward {
            let s = T::one() - beta;
            (s, -beta / (s * (s + beta * gj)))
        } else {
            let s = T::one() + beta;
            (s, beta / (s * (s - beta * gj)))
        };
        let k = self.k;
        for r in 0..k {
            for c in 0..k {
                self.minv[(r, c)] = self.minv[(r, c)] / scale + coef * a[r] * a[c];
            }
        }
        for i in 0..self.n() {
            let pa = dot(&self.pts[i * k..(i + 1) * k], &a);
            self.g[i] = self.g[i] / scale + coef * pa * pa;
        }
    }

    fn moment(&self, u: &[T]) -> DenseMatrix<T> {
        let k = self.k;
        let mut m = DenseMatrix::zeros(k, k);
        for (i, &ui) in u.iter().enumerate() {
            if ui == T::zero() {
                continue;
            }
            let p = self.point(i);
            for r in 0..k {
                for c in 0..k {
                    m[(r, c)] += ui * p[r] * p[c];
                }
            }
        }
        m
    }

    /// Newton's method for `max log det M(u)` with `u` restricted to the
    /// current support. Points leave the support when a step would drive
    /// their weight negative. Leaves `minv` and `g` exact; returns the number
    /// of Newton steps taken.
    fn polish_support(&mut self) -> Result<usize> {
        let max_steps = 30;
        let mut steps = 0;
        while steps < max_steps {
            let support: Vec<usize> = (0..self.n()).filter(|&i| self.u[i] > T::zero()).collect();
            let s = support.len();
            let a: Vec<Vec<T>> = support.iter().map(|&i| self.minv.matvec(self.point(i))).collect();
            // Hessian of -log det on the support: (p_i^T M^-1 p_j)^2
            let h = DenseMatrix::from_fn(s, s, |x, y| {
                let v = dot(self.point(support[x]), &a[y]);
                v * v
            });
            let Ok(hinv) = spd_inverse(&h) else { break };
            let grad: Vec<T> = support.iter().map(|&i| self.g[i]).collect();
            let hg = hinv.matvec(&grad);
            let h1 = hinv.matvec(&vec![T::one(); s]);
            let nu = hg.iter().copied().sum::<T>() / h1.iter().copied().sum::<T>();
            let delta: Vec<T> = hg.iter().zip(&h1).map(|(&x, &y)| x - nu * y).collect();
            let decrement: T = delta.iter().zip(&grad).map(|(&d, &g)| d * g).sum();
            if !(decrement > T::epsilon() * T::lit(self.k as f64)) {
                break;
            }

            let mut t_max = T::infinity();
            let mut blocking = None;
            for (x, &d) in delta.iter().enumerate() {
                if d < T::zero() {
                    let t = -self.u[support[x]] / d;
                    if t < t_max {
                        t_max = t;
                        blocking = Some(x);
                    }
                }
            }
            let current = spd_log_det(&self.moment(&self.u))?;
            let mut t = T::one().min(t_max);
            let mut accepted = None;
            for _ in 0..40 {
                let mut trial = self.u.clone();
                for (x, &i) in support.iter().enumerate() {
                    trial[i] += t * delta[x];
                }
                if t == t_max {
                    if let Some(x) = blocking {
                        trial[support[x]] = T::zero();
                    }
                }
                trial.iter_mut().for_each(|v| *v = v.max(T::zero()));
                renormalize(&mut trial);
                if let Ok(ld) = spd_log_det(&self.moment(&trial)) {
                    if ld > current {
                        accepted = Some(trial);
                        break;
                    }
                }
                t *= T::lit(0.5);
            }
            let Some(trial) = accepted else { break };
            self.u = trial;
            self.refactor()?;
            steps += 1;
        }
        Ok(steps)
    }
}

/// Solves the centered MVEE of the columns of `p` (`k x n`).
pub fn solve_mvee<T: Scalar>(p: &DenseMatrix<T>, opts: &MveeOptions<T>) -> Result<Ellipsoid<T>> {
    let (k, n) = (p.rows(), p.cols());
    if k == 0 || n == 0 {
        return Err(Error::SizeMismatch(format!("empty point matrix {k}x{n}")));
    }
    if !(opts.epsilon > T::zero()) {
        return Err(Error::InvalidParameter("MVEE epsilon must be positive".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let support = match spa_select(p, &all, k) {
        Ok(s) => s,
        Err(Error::RankCollapse { selected, .. }) => {
            return Err(Error::RankDeficient { rank: selected, expected: k })
        }
        Err(e) => return Err(e),
    };

    let kf = T::lit(k as f64);
    let mut pts = Vec::with_capacity(n * k);
    for i in 0..n {
        pts.extend(p.column(i));
    }
    let mut u = vec![T::zero(); n];
    for &s in &support {
        u[s] = T::one() / kf;
    }
    let mut st = DualState { k, pts, u, minv: DenseMatrix::zeros(k, k), g: vec![T::zero(); n] };
    st.refactor()?;

    let cap = opts.max_iterations.unwrap_or_else(|| {
        (100.0 * k as f64 * (n as f64).ln().max(1.0)).ceil() as usize
    });
    let eps = opts.epsilon;
    let one = T::one();
    let mut iterations = 0usize;
    let mut since_refactor = 0usize;
    loop {
        let (mut jp, mut gp) = (0, st.g[0]);
        let (mut jm, mut gm) = (usize::MAX, T::infinity());
        for i in 0..n {
            if st.g[i] > gp {
                jp = i;
                gp = st.g[i];
            }
            if st.u[i] > T::zero() && st.g[i] < gm {
                jm = i;
                gm = st.g[i];
            }
        }
        let eps_plus = gp / kf - one;
        let eps_minus = one - gm / kf;
        if eps_plus <= eps && eps_minus <= eps {
            if since_refactor == 0 {
                break;
            }
            // Confirm on exactly recomputed leverages before stopping.
            st.refactor()?;
            since_refactor = 0;
            continue;
        }
        if iterations >= cap {
            return Err(Error::NoConvergence {
                what: "MVEE",
                detail: format!(
                    "after {iterations} iterations: max leverage ratio exceeds 1 by {:e} \
                     (target {:e})",
                    eps_plus.as_f64(),
                    eps.as_f64()
                ),
            });
        }

        if eps_plus >= eps_minus {
            let beta = (gp - kf) / (kf * (gp - one));
            for x in st.u.iter_mut() {
                *x *= one - beta;
            }
            st.u[jp] += beta;
            st.rank_one(jp, beta, true);
        } else {
            let uj = st.u[jm];
            let drop = uj / (one - uj);
            let beta = if gm > one { ((kf - gm) / (kf * (gm - one))).min(drop) } else { drop };
            let dropped = beta >= drop;
            for x in st.u.iter_mut() {
                *x *= one + beta;
            }
            if dropped {
                st.u[jm] = T::zero();
            } else {
                st.u[jm] -= beta;
            }
            let denom = one + beta - beta * gm;
            if denom > T::epsilon() * T::lit(1e3) {
                st.rank_one(jm, beta, false);
            } else {
                st.refactor()?;
                since_refactor = 0;
            }
        }
        iterations += 1;
        since_refactor += 1;
        if since_refactor >= opts.refactor_every {
            renormalize(&mut st.u);
            st.refactor()?;
            iterations += st.polish_support()?;
            since_refactor = 0;
        }
    }

    let shape = st.minv.map(|x| x / kf);
    let leverage: Vec<T> = st.g.iter().map(|&g| g / kf).collect();
    let epsilon_achieved = leverage.iter().copied().fold(T::neg_infinity(), T::max) - one;
    let active = threshold_active(&leverage, opts.tau_active);
    Ok(Ellipsoid { shape, weights: st.u, leverage, epsilon_achieved, active, iterations })
}

fn renormalize<T: Scalar>(u: &mut [T]) {
    let s: T = u.iter().copied().sum();
    if s > T::zero() {
        u.iter_mut().for_each(|x| *x /= s);
    }
}

fn threshold_active<T: Scalar>(leverage: &[T], tau: T) -> Vec<usize> {
    let cut = T::one() - tau;
    leverage.iter().enumerate().filter(|(_, &v)| v >= cut).map(|(i, _)| i).collect()
}

/// `{ i : p_i^T X p_i >= 1 - tau }` in ascending order, evaluated on `p`.
pub fn active_indices<T: Scalar>(e: &Ellipsoid<T>, p: &DenseMatrix<T>, tau: T) -> Vec<usize> {
    let leverage: Vec<T> = (0..p.cols())
        .map(|i| {
            let col = p.column(i);
            dot(&col, &e.shape.matvec(&col))
        })
        .collect();
    threshold_active(&leverage, tau)
}
