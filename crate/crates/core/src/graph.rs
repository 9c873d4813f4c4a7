//! Weighted undirected graphs, the normalized Laplacian, k-way partitions
//! and conductance.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Symmetric graph with strictly positive edge weights stored in compressed
/// row form (both directions of every edge, self-loops once).
///
/// Every node has positive degree `d_i = sum_j w(i, j)`, self-loops included.
#[derive(Debug, Clone)]
pub struct WeightedGraph<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<T>,
    degrees: Vec<T>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Builds a graph from `(i, j, w)` triplets over 0-based nodes.
    ///
    /// Each unordered pair may appear in either orientation; duplicates are
    /// summed. Zero weights are dropped, negative or non-finite weights are
    /// rejected, and a node left with zero degree is an error.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut pairs: Vec<(usize, usize, T)> = Vec::new();
        for (i, j, w) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            if !w.is_finite() || w < T::zero() {
                return Err(Error::InvalidWeight { i, j, weight: w.as_f64() });
            }
            if w > T::zero() {
                pairs.push((i.min(j), i.max(j), w));
            }
        }
        pairs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(pairs.len());
        for (i, j, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += w,
                _ => merged.push((i, j, w)),
            }
        }

        let mut counts = vec![0usize; n];
        for &(i, j, _) in &merged {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for c in &counts {
            row_ptr.push(row_ptr.last().unwrap() + c);
        }
        let nnz = *row_ptr.last().unwrap();
        let mut col_idx = vec![0usize; nnz];
        let mut weights = vec![T::zero(); nnz];
        let mut fill = row_ptr[..n].to_vec();
        // `merged` is sorted by (i, j), so pushing (i -> j) keeps rows sorted
        // for the upper half; the mirrored entries are sorted below.
        for &(i, j, w) in &merged {
            col_idx[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
            if i != j {
                col_idx[fill[j]] = i;
                weights[fill[j]] = w;
                fill[j] += 1;
            }
        }
        for r in 0..n {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            let mut row: Vec<(usize, T)> =
                col_idx[lo..hi].iter().copied().zip(weights[lo..hi].iter().copied()).collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            for (off, (c, w)) in row.into_iter().enumerate() {
                col_idx[lo + off] = c;
                weights[lo + off] = w;
            }
        }

        let degrees: Vec<T> =
            (0..n).map(|r| weights[row_ptr[r]..row_ptr[r + 1]].iter().copied().sum()).collect();
        if let Some(node) = degrees.iter().position(|&d| !(d > T::zero())) {
            return Err(Error::ZeroDegree { node });
        }
        Ok(Self { n, row_ptr, col_idx, weights, degrees })
    }

    /// Builds a graph from a dense symmetric adjacency matrix.
    pub fn from_dense(w: &DenseMatrix<T>) -> Result<Self> {
        let n = w.rows();
        if w.cols() != n {
            return Err(Error::SizeMismatch(format!("adjacency is {}x{}", n, w.cols())));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                let (a, b) = (w[(i, j)], w[(j, i)]);
                if a != b {
                    return Err(Error::InvalidData(format!(
                        "adjacency not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if a != T::zero() {
                    edges.push((i, j, a));
                }
            }
        }
        Self::from_edges(n, edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    #[inline]
    pub fn degree(&self, i: usize) -> T {
        self.degrees[i]
    }

    /// Number of stored unordered pairs (self-loops count once).
    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Neighbors of `i` with their weights, in ascending node order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].iter().copied().zip(self.weights[lo..hi].iter().copied())
    }

    /// Each unordered pair once, as `(i, j, w)` with `i <= j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i).filter(move |&(j, _)| j >= i).map(move |(j, w)| (i, j, w))
        })
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.weights[lo + p],
            Err(_) => T::zero(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                m[(i, j)] = w;
            }
        }
        m
    }

    /// Volume `mu(S) = sum of degrees in S`.
    pub fn volume(&self, nodes: &[usize]) -> T {
        nodes.iter().map(|&i| self.degrees[i]).sum()
    }

    /// Same graph with every node id mapped through `perm` (`new = perm[old]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::SizeMismatch("permutation length".into()));
        }
        Self::from_edges(self.n, self.edges().map(|(i, j, w)| (perm[i], perm[j], w)))
    }

    pub fn cast<U: Scalar>(&self) -> WeightedGraph<U> {
        WeightedGraph {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            weights: self.weights.iter().map(|&w| U::lit(w.as_f64())).collect(),
            degrees: self.degrees.iter().map(|&d| U::lit(d.as_f64())).collect(),
        }
    }
}

/// `I - D^{-1/2} W D^{-1/2}` as a sparse symmetric operator.
#[derive(Debug, Clone)]
pub struct NormalizedLaplacian<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    sqrt_degrees: Vec<T>,
}

/// Forms the normalized Laplacian of `g`.
pub fn normalized_laplacian<T: Scalar>(g: &WeightedGraph<T>) -> Result<NormalizedLaplacian<T>> {
    if let Some(node) = g.degrees().iter().position(|&d| !(d > T::zero())) {
        return Err(Error::ZeroDegree { node });
    }
    let sqrt_degrees: Vec<T> = g.degrees().iter().map(|d| d.sqrt()).collect();
    let n = g.n();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        let mut diag_done = false;
        for (j, w) in g.neighbors(i) {
            if j > i && !diag_done {
                col_idx.push(i);
                values.push(T::one());
                diag_done = true;
            }
            let v = w / (sqrt_degrees[i] * sqrt_degrees[j]);
            if j == i {
                col_idx.push(i);
                values.push(T::one() - v);
                diag_done = true;
            } else {
                col_idx.push(j);
                values.push(-v);
            }
        }
        if !diag_done {
            col_idx.push(i);
            values.push(T::one());
        }
        row_ptr.push(col_idx.len());
    }
    Ok(NormalizedLaplacian { n, row_ptr, col_idx, values, sqrt_degrees })
}

impl<T: Scalar> NormalizedLaplacian<T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `D^{1/2} 1`, the null vector of a connected graph's Laplacian.
    pub fn sqrt_degrees(&self) -> &[T] {
        &self.sqrt_degrees
    }

    fn row_dot(&self, i: usize, x: &[T]) -> T {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .fold(T::zero(), |acc, (&j, &v)| acc + v * x[j])
    }

    /// `y = L x`
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        if self.values.len() > 1 << 16 {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn mul(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.apply(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[p])] = self.values[p];
            }
        }
        m
    }

    /// `x^T L x`
    pub fn quadratic_form(&self, x: &[T]) -> T {
        crate::scalar::dot(x, &self.mul(x))
    }
}

/// A k-way partition of nodes `0..n` with no empty cluster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// `labels[v]` is the 0-based cluster of node `v`; every id in `0..k`
    /// must occur.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPartition("k must be positive".into()));
        }
        let mut seen = vec![false; k];
        for (v, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::InvalidPartition(format!(
                    "node {} has label {} outside 1..={k}",
                    v + 1,
                    l + 1
                )));
            }
            seen[l] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("cluster {} is empty", c + 1)));
        }
        Ok(Self { labels, k })
    }

    /// Infers `k` as the largest label plus one.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, k)
    }

    /// Partition from explicit clusters of node indices (must cover `0..n`
    /// exactly once).
    pub fn from_clusters(n: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in clusters.iter().enumerate() {
            for &v in members {
                if v >= n {
                    return Err(Error::NodeOutOfRange { index: v, n });
                }
                if labels[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("node {} in two clusters", v + 1)));
                }
                labels[v] = c;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("node {} unassigned", v + 1)));
        }
        Self::new(labels, clusters.len())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Members of each cluster in ascending node order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.k];
        for (v, &l) in self.labels.iter().enumerate() {
            c[l].push(v);
        }
        c
    }

    /// Same partition with node ids mapped through `perm` (`new = perm[old]`).
    pub fn permuted_nodes(&self, perm: &[usize]) -> Self {
        let mut labels = vec![0; self.labels.len()];
        for (old, &l) in self.labels.iter().enumerate() {
            labels[perm[old]] = l;
        }
        Self { labels, k: self.k }
    }

    /// Same clusters with cluster ids mapped through `relabel` (a permutation
    /// of `0..k`).
    pub fn relabeled(&self, relabel: &[usize]) -> Self {
        Self { labels: self.labels.iter().map(|&l| relabel[l]).collect(), k: self.k }
    }
}

fn membership(n: usize, cluster: &[usize]) -> Result<(Vec<bool>, usize)> {
    let mut inside = vec![false; n];
    let mut count = 0;
    for &v in cluster {
        if v >= n {
            return Err(Error::NodeOutOfRange { index: v, n });
        }
        if !inside[v] {
            inside[v] = true;
            count += 1;
        }
    }
    Ok((inside, count))
}

/// Total weight of edges with exactly one endpoint in `cluster`.
pub fn cut_weight<T: Scalar>(g: &WeightedGraph<T>, cluster: &[usize]) -> Result<T> {
    let (inside, _) = membership(g.n(), cluster)?;
    Ok(cut_with(g, &inside))
}

fn cut_with<T: Scalar>(g: &WeightedGraph<T>, inside: &[bool]) -> T {
    let mut cut = T::zero();
    for (i, &is_in) in inside.iter().enumerate() {
        if is_in {
            cut += g.neighbors(i).filter(|&(j, _)| !inside[j]).map(|(_, w)| w).sum::<T>();
        }
    }
    cut
}

/// Conductance `w(S, V \ S) / mu(S)` of a proper nonempty node set.
pub fn conductance<T: Scalar>(g: &WeightedGraph<T>, cluster: &[usize]) -> Result<T> {
    let (inside, count) = membership(g.n(), cluster)?;
    if count == 0 {
        return Err(Error::EmptyCluster);
    }
    if count == g.n() {
        return Err(Error::WholeVertexSet);
    }
    let cut = cut_with(g, &inside);
    let vol: T = inside.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| g.degree(i)).sum();
    Ok(cut / vol)
}

/// Per-cluster conductances of a partition with their maximum (MCC) and sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionProfile<T> {
    pub conductances: Vec<T>,
    pub mcc: T,
    pub sum: T,
}

pub fn partition_profile<T: Scalar>(
    g: &WeightedGraph<T>,
    partition: &Partition,
) -> Result<PartitionProfile<T>> {
    if partition.n() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "partition has {} nodes, graph has {}",
            partition.n(),
            g.n()
        )));
    }
    if partition.k() == 1 {
        return Err(Error::WholeVertexSet);
    }
    let k = partition.k();
    let mut cut = vec![T::zero(); k];
    let mut vol = vec![T::zero(); k];
    for i in 0..g.n() {
        let li = partition.label(i);
        vol[li] += g.degree(i);
        for (j, w) in g.neighbors(i) {
            if partition.label(j) != li {
                cut[li] += w;
            }
        }
    }
    let conductances: Vec<T> = cut.iter().zip(&vol).map(|(&c, &v)| c / v).collect();
    let mcc = conductances.iter().copied().fold(T::zero(), T::max);
    let sum = conductances.iter().copied().sum();
    Ok(PartitionProfile { conductances, mcc, sum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> WeightedGraph<f64> {
        WeightedGraph::<f64>::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn two_node_path_laplacian() {
        let g = WeightedGraph::<f64>::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let l = normalized_laplacian(&g).unwrap().to_dense();
        let want = DenseMatrix::<f64>::from_row_major(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert!(l.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn duplicates_are_summed_and_orientation_ignored() {
        let g = WeightedGraph::<f64>::from_edges(3, [(0, 1, 1.0), (1, 0, 0.5), (1, 2, 2.0)]).unwrap();
        assert_eq!(g.weight(0, 1), 1.5);
        assert_eq!(g.weight(1, 0), 1.5);
        assert_eq!(g.degrees(), &[1.5, 3.5, 2.0]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn self_loop_counts_in_degree_not_cut() {
        let g = WeightedGraph::<f64>::from_edges(2, [(0, 0, 3.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(g.degrees(), &[4.0, 1.0]);
        assert_eq!(conductance(&g, &[0]).unwrap(), 0.25);
        let l = normalized_laplacian(&g).unwrap();
        let r = l.mul(l.sqrt_degrees());
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_degree_rejected_with_node() {
        let err = WeightedGraph::<f64>::from_edges(3, [(0, 1, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::ZeroDegree { node: 2 }));
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(matches!(
            WeightedGraph::<f64>::from_edges(2, [(0, 1, -1.0)]),
            Err(Error::InvalidWeight { .. })
        ));
    }

    #[test]
    fn four_cycle_conductance() {
        let g = four_cycle();
        assert_eq!(conductance(&g, &[0, 1]).unwrap(), 0.5);
        assert_eq!(conductance(&g, &[2]).unwrap(), 1.0);
    }

    #[test]
    fn conductance_rejects_empty_and_whole() {
        let g = four_cycle();
        assert!(matches!(conductance(&g, &[]), Err(Error::EmptyCluster)));
        assert!(matches!(conductance(&g, &[0, 1, 2, 3]), Err(Error::WholeVertexSet)));
        assert!(matches!(conductance(&g, &[7]), Err(Error::NodeOutOfRange { index: 7, n: 4 })));
    }

    #[test]
    fn block_diagonal_cluster_has_zero_conductance() {
        let g = WeightedGraph::<f64>::from_edges(4, [(0, 1, 2.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(conductance(&g, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn four_cycle_profile() {
        let g = four_cycle();
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let prof = partition_profile(&g, &p).unwrap();
        assert_eq!(prof.conductances, vec![0.5, 0.5]);
        assert_eq!(prof.mcc, 0.5);
        assert_eq!(prof.sum, 1.0);
    }

    #[test]
    fn partition_rejects_empty_cluster() {
        assert!(Partition::new(vec![0, 0, 2], 3).is_err());
        assert!(Partition::from_clusters(3, &[vec![0], vec![1]]).is_err());
        let p = Partition::from_clusters(3, &[vec![2], vec![0, 1]]).unwrap();
        assert_eq!(p.labels(), &[1, 1, 0]);
    }
}
