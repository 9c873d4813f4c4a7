//! External clustering metrics: accuracy under the best label matching and
//! normalized mutual information.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::Partition;

/// Counts `n_uv = |C_u ∩ T_v|` with marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new(c: &Partition, t: &Partition) -> Result<Self> {
        if c.n() != t.n() {
            return Err(Error::SizeMismatch(format!(
                "partitions cover {} and {} nodes",
                c.n(),
                t.n()
            )));
        }
        let mut counts = vec![vec![0usize; t.k()]; c.k()];
        for (&a, &b) in c.labels().iter().zip(t.labels()) {
            counts[a][b] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..t.k()).map(|v| counts.iter().map(|r| r[v]).sum()).collect();
        Ok(Self { counts, row_sums, col_sums, n: c.n() })
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials). Returns `assign[row] = column`.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is a virtual start column
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    assign
}

/// `(1/n) max_sigma sum_u |C_u ∩ T_sigma(u)|`. Both partitions must have
/// the same number of nodes and clusters.
pub fn accuracy(c: &Partition, t: &Partition) -> Result<f64> {
    if c.k() != t.k() {
        return Err(Error::SizeMismatch(format!("k = {} versus k = {}", c.k(), t.k())));
    }
    let table = ContingencyTable::new(c, t)?;
    let cost: Vec<Vec<i64>> =
        table.counts.iter().map(|r| r.iter().map(|&x| -(x as i64)).collect()).collect();
    let assign = hungarian(&cost);
    let matched: usize = assign.iter().enumerate().map(|(u, &v)| table.counts[u][v]).sum();
    Ok(matched as f64 / table.n as f64)
}

fn entropy(marginals: &[usize], n: f64) -> f64 {
    marginals
        .iter()
        .filter(|&&m| m > 0)
        .map(|&m| {
            let p = m as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `2 I(C; T) / (H(C) + H(T))`, clamped to `[0, 1]`.
///
/// Both entropies vanish only when both partitions are the single cluster
/// of all nodes; they are then equal and the value is 1.
pub fn nmi(c: &Partition, t: &Partition) -> Result<f64> {
    let table = ContingencyTable::new(c, t)?;
    let n = table.n as f64;
    let hc = entropy(&table.row_sums, n);
    let ht = entropy(&table.col_sums, n);
    if hc + ht == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (u, row) in table.counts.iter().enumerate() {
        for (v, &x) in row.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let x = x as f64;
            mi += x / n * (n * x / (table.row_sums[u] as f64 * table.col_sums[v] as f64)).ln();
        }
    }
    Ok((2.0 * mi / (hc + ht)).clamp(0.0, 1.0))
}

/// Runs `op` and returns its result with the elapsed wall-clock seconds.
pub fn timed<A>(op: impl FnOnce() -> A) -> (A, f64) {
    let start = Instant::now();
    let out = op();
    (out, start.elapsed().as_secs_f64())
}
