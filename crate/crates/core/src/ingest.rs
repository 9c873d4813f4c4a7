//! Feature vectors and the cosine-similarity nearest-neighbor graph.
//!
//! Binary vector files (`VDS1`) are little-endian: the magic bytes `VDS1`,
//! `u32 n`, `u32 d`, a reserved `u32` (zero), then `n * d` `f64` values row
//! by row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::scalar::{dot, norm2, Scalar};

const MAGIC: &[u8; 4] = b"VDS1";

/// `n` nonnegative vectors of dimension `d`, row-major.
#[derive(Debug, Clone)]
pub struct VectorDataset<T> {
    n: usize,
    d: usize,
    data: Vec<T>,
    pub labels: Option<Partition>,
}

impl<T: Scalar> VectorDataset<T> {
    pub fn new(n: usize, d: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::SizeMismatch(format!("{} values for {n} x {d}", data.len())));
        }
        if d == 0 {
            return Err(Error::InvalidData("vectors have dimension 0".into()));
        }
        for i in 0..n {
            let row = &data[i * d..(i + 1) * d];
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= T::zero())) {
                return Err(Error::InvalidData(format!(
                    "row {} has entry {x}; vectors must be finite and nonnegative",
                    i + 1
                )));
            }
            if row.iter().all(|&x| x == T::zero()) {
                return Err(Error::InvalidData(format!("row {} is the zero vector", i + 1)));
            }
        }
        Ok(Self { n, d, data, labels: None })
    }

    pub fn with_labels(mut self, labels: Partition) -> Result<Self> {
        if labels.n() != self.n {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} vectors",
                labels.n(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// One vector per CSV record. A first record that does not parse as numbers
/// is taken to be a header.
pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<VectorDataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut data = Vec::new();
    let mut d = None;
    let mut n = 0;
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse { line: idx + 1, msg: format!("not a number: {e}") });
            }
        };
        match d {
            None => d = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("{} fields, expected {d}", values.len()),
                })
            }
            _ => {}
        }
        data.extend(values.into_iter().map(T::lit));
        n += 1;
    }
    let d = d.ok_or_else(|| Error::InvalidData("no vectors in input".into()))?;
    VectorDataset::new(n, d, data)
}

pub fn write_csv<T: Scalar, W: Write>(data: &VectorDataset<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for i in 0..data.n() {
        w.write_record(data.row(i).iter().map(|x| x.as_f64().to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<T: Scalar, R: Read>(reader: R) -> Result<VectorDataset<T>> {
    let mut r = BufReader::new(reader);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::InvalidData("missing VDS1 magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().unwrap()) as usize;
    let (n, d) = (word(4), word(8));
    if word(12) != 0 {
        return Err(Error::InvalidData("reserved header word is nonzero".into()));
    }
    let mut data = Vec::with_capacity(n * d);
    let mut buf = [0u8; 8];
    for _ in 0..n * d {
        r.read_exact(&mut buf)?;
        data.push(T::lit(f64::from_le_bytes(buf)));
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::InvalidData("trailing bytes after the last vector".into()));
    }
    VectorDataset::new(n, d, data)
}

pub fn write_binary<T: Scalar, W: Write>(data: &VectorDataset<T>, writer: W) -> Result<()> {
    let too_big = |v: usize| u32::try_from(v).map_err(|_| Error::InvalidData(format!("{v} exceeds u32")));
    let mut w = BufWriter::new(writer);
    w.write_all(MAGIC)?;
    w.write_all(&too_big(data.n())?.to_le_bytes())?;
    w.write_all(&too_big(data.d())?.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for x in data.as_slice() {
        w.write_all(&x.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `.csv` as CSV and anything else as `VDS1`.
pub fn read_vectors_file<T: Scalar>(path: impl AsRef<Path>) -> Result<VectorDataset<T>> {
    let path = path.as_ref();
    let f = File::open(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_csv(f)
    } else {
        read_binary(f)
    }
}

/// Cosine similarity of two nonzero vectors.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    dot(a, b) / (norm2(a) * norm2(b))
}

/// `w_ij = s(a_i, a_j)` when either vector is among the `p` most similar to
/// the other, else 0. Similarity ties at rank `p` are all kept, so a
/// neighbor set can exceed `p`. Pairs with zero similarity give no edge.
pub fn cosine_knn_graph<T: Scalar>(data: &VectorDataset<T>, p: usize) -> Result<WeightedGraph<T>> {
    let n = data.n();
    if p == 0 || p >= n {
        return Err(Error::InvalidParameter(format!("neighbor count p = {p} needs 1 <= p < n = {n}")));
    }
    let norms: Vec<T> = (0..n).map(|i| norm2(data.row(i))).collect();
    // same arithmetic as `cosine`, so s(i, j) == s(j, i) bit for bit
    let sim = |i: usize, j: usize| dot(data.row(i), data.row(j)) / (norms[i] * norms[j]);
    let neighbors: Vec<Vec<(usize, T)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let sims: Vec<(usize, T)> = (0..n).filter(|&j| j != i).map(|j| (j, sim(i, j))).collect();
            let mut vals: Vec<T> = sims.iter().map(|&(_, s)| s).collect();
            let (_, &mut kth, _) =
                vals.select_nth_unstable_by(p - 1, |a, b| b.partial_cmp(a).unwrap());
            sims.into_iter().filter(|&(_, s)| s >= kth && s > T::zero()).collect()
        })
        .collect();

    let mut edges: Vec<(usize, usize, T)> = neighbors
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&(j, s)| (i.min(j), i.max(j), s)))
        .collect();
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let mut touched = vec![false; n];
    for &(i, j, _) in &edges {
        touched[i] = true;
        touched[j] = true;
    }
    if let Some(v) = touched.iter().position(|t| !t) {
        return Err(Error::InvalidData(format!(
            "node {} has no neighbor with positive similarity",
            v + 1
        )));
    }
    WeightedGraph::from_edges(n, edges)
}
