use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: u32, found: u32 },
    #[error("Whitehead graph of the empty word is undefined")]
    EmptyGraph,
    #[error("edge {0} joins a letter to its inverse and has no reducing Nielsen pair")]
    NoEdgeAutomorphism(usize),
    #[error("orbit search exceeded {states} states below length cap {cap}")]
    OrbitCapExceeded { cap: usize, states: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is undefined on an empty set")]
    Empty(&'static str),
    #[error("generation gave up after {0} attempts")]
    AttemptsExhausted(usize),
    #[error("centroid strategy requires a model")]
    MissingModel,
}

pub type Result<T> = std::result::Result<T, Error>;
