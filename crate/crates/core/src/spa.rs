//! Successive projection: greedy selection of `r` well-spread columns.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{axpy, dot, norm2, scale, Scalar};

/// Selects `r` of the `candidates` columns of `p`.
///
/// Repeats `r` times: take the candidate whose residual has the largest
/// Euclidean norm (lowest column index on ties), then project every residual
/// onto the orthogonal complement of that column's residual direction.
/// Indices are returned in selection order.
pub fn spa_select<T: Scalar>(
    p: &DenseMatrix<T>,
    candidates: &[usize],
    r: usize,
) -> Result<Vec<usize>> {
    let n = p.cols();
    let mut seen = vec![false; n];
    for &c in candidates {
        if c >= n {
            return Err(Error::NodeOutOfRange { index: c, n });
        }
        if seen[c] {
            return Err(Error::InvalidParameter(format!("candidate {c} listed twice")));
        }
        seen[c] = true;
    }
    if candidates.len() < r {
        return Err(Error::InvalidParameter(format!(
            "cannot select {r} indices from {} candidates",
            candidates.len()
        )));
    }

    let mut residuals: Vec<Vec<T>> = candidates.iter().map(|&c| p.column(c)).collect();
    let scale_ref = residuals.iter().map(|v| norm2(v)).fold(T::zero(), T::max);
    let floor = T::tol(1e-12, 16.0) * scale_ref.max(T::min_positive_value());
    let mut taken = vec![false; candidates.len()];
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(r);
    let mut picks = Vec::with_capacity(r);

    for step in 0..r {
        let mut best: Option<(usize, T)> = None;
        for (pos, res) in residuals.iter().enumerate() {
            if taken[pos] {
                continue;
            }
            let nrm = norm2(res);
            best = match best {
                None => Some((pos, nrm)),
                Some((bp, bn)) => {
                    if nrm > bn || (nrm == bn && candidates[pos] < candidates[bp]) {
                        Some((pos, nrm))
                    } else {
                        Some((bp, bn))
                    }
                }
            };
        }
        let (pos, nrm) = best.expect("at least r candidates");
        if !(nrm > floor) {
            return Err(Error::RankCollapse { selected: step, requested: r });
        }
        let mut q = residuals[pos].clone();
        scale(T::one() / nrm, &mut q);
        for b in &basis {
            let c = dot(b, &q);
            axpy(-c, b, &mut q);
        }
        let qn = norm2(&q);
        scale(T::one() / qn, &mut q);

        taken[pos] = true;
        picks.push(candidates[pos]);
        for (other, res) in residuals.iter_mut().enumerate() {
            if taken[other] {
                continue;
            }
            let c = dot(&q, res);
            axpy(-c, &q, res);
        }
        basis.push(q);
    }
    Ok(picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_trace_picks_dominant_then_orthogonal() {
        // columns 3e1, 2e2, e1
        let p = DenseMatrix::<f64>::from_row_major(2, 3, vec![3.0, 0.0, 1.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(spa_select(&p, &[0, 1, 2], 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn full_candidate_set_is_returned() {
        let p = DenseMatrix::<f64>::from_row_major(2, 4, vec![1.0, 5.0, 0.0, 2.0, 0.0, 1.0, 3.0, 1.0])
            .unwrap();
        let mut got = spa_select(&p, &[3, 1], 2).unwrap();
        got.sort();
        assert_eq!(got, vec![1, 3]);
    }

    #[test]
    fn diagonal_plus_halves_selects_full_scale() {
        let d = [3.0, 1.0, 2.0];
        let mut cols = Vec::new();
        for (i, &v) in d.iter().enumerate() {
            let mut c = vec![0.0; 3];
            c[i] = v;
            cols.push(c);
        }
        for (i, &v) in d.iter().enumerate() {
            let mut c = vec![0.0; 3];
            c[i] = v / 2.0;
            cols.push(c);
        }
        let p = DenseMatrix::<f64>::from_columns(&cols).unwrap();
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(spa_select(&p, &all, 3).unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let p = DenseMatrix::<f64>::from_row_major(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(spa_select(&p, &[1, 0], 1).unwrap(), vec![0]);
    }

    #[test]
    fn collapse_reports_progress() {
        let p = DenseMatrix::<f64>::from_row_major(2, 3, vec![1.0, 2.0, -1.0, 1.0, 2.0, -1.0]).unwrap();
        assert!(matches!(
            spa_select(&p, &[0, 1, 2], 2),
            Err(Error::RankCollapse { selected: 1, requested: 2 })
        ));
    }
}
