//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not in the maximal torus (off-diagonal mass {0:.3e})")]
    NotInTorus(f64),

    #[error("retraction failure: {0}")]
    RetractionFailure(String),

    #[error("sample matrix is numerically singular (smallest singular value {0:.3e})")]
    SingularSample(f64),

    #[error("Gram solve failure (condition estimate {0:.3e})")]
    GramSolve(f64),

    #[error("point is not regular for the moment map (smallest singular value {0:.3e})")]
    NotRegular(f64),

    #[error("rank deficiency: expected rank {expected}, got {got}")]
    RankDeficiency { expected: usize, got: usize },

    #[error("admissible basis search exhausted: {0}")]
    SearchExhausted(String),

    #[error("gradient collapse near a critical point (norm {0:.3e})")]
    NearCritical(f64),

    #[error("projection did not converge in {iters} iterations (last residual {last:.3e})")]
    NonConvergence {
        iters: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("matrix logarithm branch failure (eigenvalue within {0:.3e} of -1)")]
    LogBranch(f64),

    #[error("no loop could be sampled on the requested level")]
    EmptyLevel,

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("invalid loop data: {0}")]
    InvalidLoop(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
