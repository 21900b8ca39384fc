//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by graph construction, spectral analysis and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimension for the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The graph description violates a structural rule.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// The iterative eigensolver did not reach its tolerance.
    #[error("eigensolver failed to converge")]
    EigenSolverFailure,

    /// An index referred outside `0..size`.
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// The requested edge does not exist.
    #[error("no edge between vertices {i} and {j}")]
    NoSuchEdge { i: usize, j: usize },

    /// The sampled vertices carry no energy of the frequency band, so no
    /// finite stable step size exists.
    #[error("sampling set captures no energy of the frequency band")]
    EmptyBandEnergy,

    /// The error recursion is not mean-square stable.
    #[error("unstable configuration: error-recursion spectral radius {rho}")]
    Unstable { rho: f64 },

    /// A relative deviation was requested against an all-zero reference.
    #[error("reference vector has zero norm")]
    ZeroReference,

    /// Step-size tuning cannot reach the requested target.
    #[error("step-size target not achievable: {0}")]
    UnachievableTarget(String),

    /// A configuration value violates its documented constraints.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Filesystem failure while reading or writing artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed JSON input.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
