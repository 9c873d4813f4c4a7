//! Spectral graph clustering with an ellipsoidal-rounding grouping stage.
//!
//! The pipeline embeds nodes with the bottom eigenvectors of the normalized
//! Laplacian, draws the origin-centered minimum-volume enclosing ellipsoid of
//! the embedded points, takes the points on its boundary (narrowed to `k`
//! by successive projection) as cluster representatives, and assigns every
//! node to the representative with the most aligned direction.
//!
//! Alongside it: a k-means spectral clustering baseline, a block-structured
//! synthetic graph generator, a cosine k-nearest-neighbor graph builder and
//! the usual external metrics.

pub mod eigen;
pub mod elli;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod ksc;
pub mod linalg;
pub mod metrics;
pub mod mvee;
pub mod params;
pub mod scalar;
pub mod spa;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Scalar;

pub use eigen::{bottom_k_eigs, gap_diagnostics, EigenOptions};
pub use elli::{elli_cluster, group_columns, ElliOptions};
pub use graph::{conductance, normalized_laplacian, partition_profile, Partition};
pub use ksc::{ksc_cluster, KscOptions};
pub use metrics::{accuracy, nmi};
pub use mvee::{active_indices, solve_mvee, MveeOptions};
pub use spa::spa_select;
pub use synth::{conductance_bound, standard_suites, synth_adjacency};

pub type Graph = graph::WeightedGraph<f64>;
pub type Laplacian = graph::NormalizedLaplacian<f64>;
pub type Embedding = eigen::Embedding<f64>;
pub type Ellipsoid = mvee::Ellipsoid<f64>;
pub type ElliResult = elli::ElliResult<f64>;
pub type KscRun = ksc::KscRun<f64>;
pub type SynthInstance = synth::SynthInstance<f64>;
pub type Matrix = linalg::DenseMatrix<f64>;
pub type VectorDataset = ingest::VectorDataset<f64>;

pub type Graph32 = graph::WeightedGraph<f32>;
pub type Embedding32 = eigen::Embedding<f32>;
pub type Matrix32 = linalg::DenseMatrix<f32>;
