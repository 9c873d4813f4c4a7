//! Block-structured synthetic graphs with a known conductance per cluster.
//!
//! A symmetric `M` with zero diagonal and off-diagonal entries uniform in
//! `(0, 1)` is split into its block-diagonal part `B` (contiguous blocks of
//! the given sizes) and the rest. The adjacency is `W = B + delta R` with
//! `R = (M - B) / 2`, so `delta = 0` gives disjoint blocks and `delta = 2`
//! gives back `M`.
//!
//! With `b_i` the within-block mass of `M` over cluster `i` (both orders) and
//! `r_i` half its outgoing mass, cluster `i` has cut `delta r_i` and volume
//! `b_i + delta r_i`, hence conductance `delta / (c_i + delta)` for
//! `c_i = b_i / r_i`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::scalar::Scalar;

/// One draw of `M` together with its block structure. Instances for any
/// `delta` can be produced from it, so a sweep shares one `M`.
#[derive(Debug, Clone)]
pub struct SynthBase<T> {
    sizes: Vec<usize>,
    /// Strict upper triangle of `M`, row by row.
    upper: Vec<T>,
    /// Node relabeling applied to every instance (`new = perm[old]`).
    perm: Option<Vec<usize>>,
    block: Vec<usize>,
    b: Vec<T>,
    r: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SynthInstance<T> {
    pub graph: WeightedGraph<T>,
    pub truth: Partition,
    pub delta: T,
    /// `c_i = b_i / r_i` (infinite when block `i` has no outgoing mass).
    pub c: Vec<T>,
    pub c_min: T,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    // i < j
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl<T: Scalar> SynthBase<T> {
    /// Samples `M` for blocks of the given sizes. With `permute`, node ids
    /// are shuffled after sampling.
    pub fn sample<R: Rng + ?Sized>(sizes: &[usize], permute: bool, rng: &mut R) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidParameter("no cluster sizes given".into()));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!("cluster {} has size 0", i + 1)));
        }
        let n: usize = sizes.iter().sum();
        let mut block = Vec::with_capacity(n);
        for (c, &s) in sizes.iter().enumerate() {
            block.extend(std::iter::repeat_n(c, s));
        }
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for _ in 0..n * (n - 1) / 2 {
            let mut x: f64 = rng.random();
            while x == 0.0 {
                x = rng.random();
            }
            upper.push(T::lit(x));
        }
        let k = sizes.len();
        let mut b = vec![T::zero(); k];
        let mut r = vec![T::zero(); k];
        let half = T::lit(0.5);
        for i in 0..n {
            for j in i + 1..n {
                let m = upper[upper_index(n, i, j)];
                if block[i] == block[j] {
                    b[block[i]] += m + m;
                } else {
                    r[block[i]] += m * half;
                    r[block[j]] += m * half;
                }
            }
        }
        let perm = if permute {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            Some(p)
        } else {
            None
        };
        Ok(Self { sizes: sizes.to_vec(), upper, perm, block, b, r })
    }

    pub fn n(&self) -> usize {
        self.block.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Entry `M[i][j]` in the unpermuted numbering.
    pub fn m(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::zero(),
            std::cmp::Ordering::Less => self.upper[upper_index(self.n(), i, j)],
            std::cmp::Ordering::Greater => self.upper[upper_index(self.n(), j, i)],
        }
    }

    pub fn c(&self) -> Vec<T> {
        self.b
            .iter()
            .zip(&self.r)
            .map(|(&b, &r)| if r > T::zero() { b / r } else { T::infinity() })
            .collect()
    }

    pub fn instance(&self, delta: T) -> Result<SynthInstance<T>> {
        if !(delta >= T::zero() && delta <= T::lit(2.0)) {
            return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 2]")));
        }
        let n = self.n();
        let off = delta * T::lit(0.5);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let m = self.upper[upper_index(n, i, j)];
                let w = if self.block[i] == self.block[j] { m } else { off * m };
                if w > T::zero() {
                    edges.push((i, j, w));
                }
            }
        }
        let mut graph = WeightedGraph::from_edges(n, edges)?;
        let mut truth = Partition::new(self.block.clone(), self.sizes.len())?;
        if let Some(p) = &self.perm {
            graph = graph.permuted(p)?;
            truth = truth.permuted_nodes(p);
        }
        let c = self.c();
        let c_min = c.iter().copied().fold(T::infinity(), T::min);
        Ok(SynthInstance { graph, truth, delta, c, c_min })
    }
}

/// Samples a fresh `M` and builds the instance for `delta`.
pub fn synth_adjacency<T: Scalar, R: Rng + ?Sized>(
    sizes: &[usize],
    delta: T,
    rng: &mut R,
) -> Result<SynthInstance<T>> {
    if !(delta >= T::zero() && delta <= T::lit(2.0)) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 2]")));
    }
    SynthBase::sample(sizes, false, rng)?.instance(delta)
}

/// `delta / (c_min + delta)`: the largest truth-cluster conductance, an
/// upper bound on the graph conductance.
pub fn conductance_bound<T: Scalar>(c_min: T, delta: T) -> T {
    if delta == T::zero() {
        T::zero()
    } else {
        delta / (c_min + delta)
    }
}

/// A named list of cluster sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suite {
    pub name: &'static str,
    pub sizes: Vec<usize>,
}

/// Full-scale balanced (50 x 200) and unbalanced (3 x 1000 + 140 x 50)
/// suites, and their desk-scale reductions (10 x 100; 2 x 200 + 8 x 25).
pub fn standard_suites() -> Vec<Suite> {
    let cat = |parts: &[(usize, usize)]| -> Vec<usize> {
        parts.iter().flat_map(|&(size, count)| std::iter::repeat_n(size, count)).collect()
    };
    vec![
        Suite { name: "balanced", sizes: cat(&[(200, 50)]) },
        Suite { name: "unbalanced", sizes: cat(&[(1000, 3), (50, 140)]) },
        Suite { name: "balanced-desk", sizes: cat(&[(100, 10)]) },
        Suite { name: "unbalanced-desk", sizes: cat(&[(200, 2), (25, 8)]) },
    ]
}

pub fn suite(name: &str) -> Option<Suite> {
    standard_suites().into_iter().find(|s| s.name == name)
}

/// Parses `"100x10"`, `"200x2,25x8"` or `"30,40,50"` into cluster sizes.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = |part: &str| Error::InvalidParameter(format!("bad size term {part:?}"));
    let mut sizes = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (size, count) = match part.split_once(['x', 'X']) {
            Some((s, c)) => (s.trim(), c.trim()),
            None => (part, "1"),
        };
        let size: usize = size.parse().map_err(|_| bad(part))?;
        let count: usize = count.parse().map_err(|_| bad(part))?;
        if size == 0 || count == 0 {
            return Err(bad(part));
        }
        sizes.extend(std::iter::repeat_n(size, count));
    }
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("no cluster sizes given".into()));
    }
    Ok(sizes)
}

/// `lo, lo + step, ...` up to `hi` inclusive, each value rounded to 12
/// decimals so that `0.1 * 3` prints as `0.3`.
pub fn delta_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad grid {lo}:{step}:{hi}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}
