use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, non-PSD
    /// covariance, singular rescaling, bad parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input outside the supported domain (e.g. degenerate covariances fed
    /// to the duality construction).
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    /// A numerical procedure failed to produce a trustworthy result.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The constrained-capacity optimizer hit its iteration cap. The best
    /// iterate found so far is attached.
    #[error("optimizer did not converge after {iterations} iterations (best value {best_value:.12e})")]
    NonConvergence {
        iterations: usize,
        best_value: f64,
        best: Box<crate::waterfill::ConstrainedCapacity>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
