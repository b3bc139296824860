//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by distribution, copula, fitting, and diagnostic routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested moment does not exist for the given parameters.
    #[error("moment undefined: {0}")]
    MomentUndefined(String),

    /// Vector arguments disagree in length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Operation limited to small dimensions (e.g. inclusion-exclusion sums).
    #[error("dimension {got} exceeds supported limit {limit}")]
    DimensionLimit { limit: usize, got: usize },

    /// An iterative optimizer failed to converge; `trace` holds the
    /// objective values per iteration of the best attempt.
    #[error("optimizer failed to converge after {iterations} iterations (|grad|={grad_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        trace: Vec<f64>,
    },

    /// Node doubling changed a quadrature result by more than the contract allows.
    #[error("quadrature did not converge under node doubling: |delta|={0:.3e}")]
    QuadratureNonconvergence(f64),

    /// The log-likelihood evaluated to a non-finite value.
    #[error("non-finite likelihood term at row {row}")]
    NonFiniteLikelihood { row: usize },

    /// A spliced-margin component received no observations.
    #[error("empty component: {0}")]
    EmptyComponent(String),

    /// Too few observations in a tail region for an empirical measure.
    #[error("insufficient tail data: need {needed}, found {found}")]
    InsufficientTailData { needed: usize, found: usize },

    /// Bootstrap aborted because too many replicate refits failed.
    #[error("bootstrap aborted: {failed}/{total} refits failed")]
    RefitFailures { failed: usize, total: usize },

    /// Root bracketing for numeric inversion failed.
    #[error("root bracketing failed: {0}")]
    BracketingFailure(String),

    /// Invalid configuration or input data.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
