//! Error type shared by all modules.
//!
//! Display messages lead with the error name so callers (notably the CLI)
//! can surface it verbatim.

/// Errors reported by clustering operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A matrix required to be symmetric positive definite was not.
    #[error("NotPositiveDefinite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// An iterative routine exhausted its iteration cap.
    #[error("ConvergenceFailure: {what} did not converge within {iters} iterations")]
    ConvergenceFailure { what: &'static str, iters: usize },

    /// A responsibility row underflowed to zero total probability.
    #[error("DegenerateRow: point {point} has zero total probability under every component")]
    DegenerateRow { point: usize },

    /// A cluster required to be non-empty was empty.
    #[error("EmptyCluster: cluster {cluster} has no members")]
    EmptyCluster { cluster: usize },

    /// A graph partition block has zero volume.
    #[error("ZeroVolume: partition block {cluster} has zero total degree")]
    ZeroVolume { cluster: usize },

    /// A graph node has zero degree, so degree normalization is undefined.
    #[error("IsolatedNode: node {node} has zero degree")]
    IsolatedNode { node: usize },

    /// Two sequences that must align had different lengths.
    #[error("LengthMismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A query point has no neighbors within the bandwidth.
    #[error("EmptyNeighborhood: no points within radius of the query")]
    EmptyNeighborhood,

    /// An input value breaks a documented precondition.
    #[error("InvalidParam: {0}")]
    InvalidParam(String),

    /// A dataset or matrix entry was NaN or infinite.
    #[error("NonFinite: non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// A responsibility row failed to sum to one.
    #[error("RowNotStochastic: row {row} sums to {sum}, expected 1 within 1e-9")]
    RowNotStochastic { row: usize, sum: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
