use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} has zero degree")]
    ZeroDegree { node: usize },

    #[error("invalid edge weight {weight} on ({i}, {j}): weights must be finite and nonnegative")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("cluster is empty")]
    EmptyCluster,

    #[error("cluster covers every node; conductance is undefined")]
    WholeVertexSet,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid cluster count k = {k} for n = {n} (need 1 <= k < n)")]
    InvalidK { k: usize, n: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("matrix has numerical rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("successive projection collapsed after selecting {selected} of {requested} indices")]
    RankCollapse { selected: usize, requested: usize },

    #[error("embedded column of node {node} is zero")]
    ZeroColumn { node: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Io,
    Numerical,
    InvalidGraph,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Csv(_) | Error::Parse { .. } => ErrorClass::Io,
            Error::NoConvergence { .. }
            | Error::RankDeficient { .. }
            | Error::RankCollapse { .. }
            | Error::ZeroColumn { .. } => ErrorClass::Numerical,
            Error::ZeroDegree { .. }
            | Error::InvalidWeight { .. }
            | Error::NodeOutOfRange { .. }
            | Error::InvalidData(_) => ErrorClass::InvalidGraph,
            Error::EmptyCluster
            | Error::WholeVertexSet
            | Error::InvalidPartition(_)
            | Error::InvalidK { .. }
            | Error::SizeMismatch(_)
            | Error::InvalidParameter(_) => ErrorClass::Usage,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
