use thiserror::Error;

/// Unified error type for the whole crate.
///
/// Numerical routines never panic on malformed input; they return one of
/// these variants with enough context to name the offending argument.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A spectral function was undefined (non-finite) at an eigenvalue.
    #[error("domain error: {0}")]
    Domain(String),

    /// Polynomial order out of range for the given dimension.
    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Exact particle collision with regularization disabled.
    #[error("singular drift: {0}")]
    SingularDrift(String),

    /// Malformed membership query (e.g. x0 not PSD within tolerance).
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    /// Covariance argument not symmetric positive definite.
    #[error("invalid sigma: {0}")]
    InvalidSigma(String),

    /// A closed-form evaluation failed (singular system, overflow).
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// An experiment was asked to run outside its validity region.
    /// The message names the violated branch.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
