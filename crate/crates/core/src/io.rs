//! File formats: Matrix Market adjacency, label files, embedding dumps.
//!
//! Every file format numbers nodes and clusters from 1.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::eigen::Embedding;
use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::scalar::Scalar;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads a square Matrix Market coordinate matrix. `real`, `integer` and
/// `pattern` fields are accepted; `general` matrices must be symmetric and
/// `symmetric` ones may list either triangle. Duplicate entries are summed.
pub fn read_matrix_market<T: Scalar, R: Read>(reader: R) -> Result<WeightedGraph<T>> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected a %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, "only the coordinate format is supported"));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "expected `rows cols nnz`"));
                }
                let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, "bad size"));
                let (r, c, z) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
                if r != c {
                    return Err(parse_err(lineno, format!("matrix is {r} x {c}, not square")));
                }
                size = Some((r, c, z));
                entries.reserve(z);
            }
            Some((n, _, _)) => {
                let want = if pattern { 2 } else { 3 };
                if fields.len() < want {
                    return Err(parse_err(lineno, "too few fields"));
                }
                let idx = |s: &str| -> Result<usize> {
                    let v: usize = s.parse().map_err(|_| parse_err(lineno, "bad index"))?;
                    if v == 0 || v > n {
                        return Err(parse_err(lineno, format!("index {v} outside 1..={n}")));
                    }
                    Ok(v - 1)
                };
                let i = idx(fields[0])?;
                let j = idx(fields[1])?;
                let w = if pattern {
                    T::one()
                } else {
                    let v: f64 = fields[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                    T::lit(v)
                };
                entries.push((i, j, w));
            }
        }
    }
    let (n, _, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(parse_err(0, format!("header promises {nnz} entries, found {}", entries.len())));
    }
    if symmetric {
        // canonicalize to the lower triangle so duplicates from both halves sum
        let edges = entries.into_iter().map(|(i, j, w)| if i >= j { (j, i, w) } else { (i, j, w) });
        WeightedGraph::from_edges(n, edges)
    } else {
        let mut dense = crate::linalg::DenseMatrix::zeros(n, n);
        for (i, j, w) in entries {
            dense[(i, j)] += w;
        }
        for i in 0..n {
            for j in i + 1..n {
                if dense[(i, j)] != dense[(j, i)] {
                    return Err(Error::InvalidData(format!(
                        "general matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        WeightedGraph::from_dense(&dense)
    }
}

pub fn read_matrix_market_file<T: Scalar>(path: impl AsRef<Path>) -> Result<WeightedGraph<T>> {
    read_matrix_market(File::open(path)?)
}

/// Writes the lower triangle as `coordinate real symmetric`.
pub fn write_matrix_market<T: Scalar, W: Write>(g: &WeightedGraph<T>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let n = g.n();
    let edges: Vec<(usize, usize, T)> = g.edges().collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {}", edges.len())?;
    for (i, j, x) in edges {
        // edges() yields i <= j; emit as (row >= col)
        writeln!(w, "{} {} {:e}", j + 1, i + 1, x.as_f64())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_file<T: Scalar>(g: &WeightedGraph<T>, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market(g, File::create(path)?)
}

/// One 1-based label per line; blank lines and `#` comments are skipped.
pub fn read_labels<R: Read>(reader: R) -> Result<Partition> {
    let mut labels = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: usize = t.parse().map_err(|_| parse_err(idx + 1, format!("bad label {t:?}")))?;
        if v == 0 {
            return Err(parse_err(idx + 1, "labels start at 1"));
        }
        labels.push(v - 1);
    }
    Partition::from_labels(labels)
}

pub fn read_labels_file(path: impl AsRef<Path>) -> Result<Partition> {
    read_labels(File::open(path)?)
}

pub fn write_labels<W: Write>(p: &Partition, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for &l in p.labels() {
        writeln!(w, "{}", l + 1)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels_file(p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    write_labels(p, File::create(path)?)
}

/// First line: the `k + 1` eigenvalues. Then `P`, one row per line.
pub fn write_embedding<T: Scalar, W: Write>(emb: &Embedding<T>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let vals: Vec<String> = emb
        .eigenvalues
        .iter()
        .chain(std::iter::once(&emb.lambda_next))
        .map(|v| format!("{:e}", v.as_f64()))
        .collect();
    writeln!(w, "{}", vals.join(" "))?;
    for i in 0..emb.k() {
        let row: Vec<String> = emb.p.row(i).iter().map(|v| format!("{:e}", v.as_f64())).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}
