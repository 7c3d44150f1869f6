//! Whitehead minimization in free groups.
//!
//! Words over `X^{±1}` are reduced to automorphically minimal length by
//! greedy descent over type-II Whitehead automorphisms. The order in which
//! candidate automorphisms are tried is pluggable: random, Nielsen-first,
//! nearest Whitehead-graph centroid, or heaviest Whitehead-graph edge.
//! Corpus generation and the benchmark statistics used to compare these
//! orderings live alongside.

pub mod automorphism;
pub mod cluster;
pub mod datagen;
pub mod engine;
pub mod error;
pub mod graph;
pub mod par;
pub mod stats;
pub mod word;

pub use automorphism::{AutoId, Automorphism, Catalog, NielsenAuto, WhiteheadAuto};
pub use cluster::{CentroidModel, KMeansModel};
pub use engine::{Engine, Reduction, RunMetrics, Search, Strategy};
pub use error::{Error, Result};
pub use graph::FeatureVector;
pub use par::Exec;
pub use word::{Letter, Word};
