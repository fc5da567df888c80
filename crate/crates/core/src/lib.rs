//! R-MAT graph generation in amortized constant work per edge.
//!
//! The classic R-MAT process draws one quadrant per recursion level, so an
//! edge on `2^k` nodes costs `k` random decisions. This crate instead
//! precomputes a table of recursion-path *fragments* (several levels at once,
//! with their joint probability), samples fragments from a Walker alias
//! table, and concatenates their row/column bits until a full edge is
//! available.
//!
//! Modules:
//!
//! * [`params`]: validated quadrant probabilities and entropy figures.
//! * [`alias`]: Walker/Vose alias tables.
//! * [`table`]: fixed-depth and variable-depth fragment tables.
//! * [`generator`]: the edge emission loop, blockwise deterministic driver
//!   and the naive reference process.
//! * [`postprocess`]: undirected mirroring, vertex scrambling, local dedup.
//! * [`partition`]: communication-free tile-partitioned generation.
//! * [`stats`]: exact cell probabilities, chi-square, degree summaries.
//! * [`bench`](mod@bench): table-size and thread-count sweeps.
//! * [`io`]: binary and text edge formats.
//!
//! With the default `parallel` feature, block generation runs on a rayon
//! pool; without it everything runs on the calling thread and produces the
//! same bytes.

pub mod alias;
pub mod bench;
mod error;
pub mod generator;
pub mod io;
pub mod params;
pub mod partition;
pub mod postprocess;
pub mod rng;
pub mod stats;
pub mod table;

pub use alias::AliasTable;
pub use error::{Error, Result};
pub use generator::{Edge, GenConfig, Generator};
pub use params::RmatParams;
pub use table::{FragmentTable, PathEntry, TableKind, TableSpec};
