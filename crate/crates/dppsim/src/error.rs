//! Crate-wide error type.

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction, sampling, and diagnostic routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run configuration is inconsistent or incomplete.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An iterative scheme failed to reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    /// A quantity that must stay positive collapsed below tolerance.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// An input exceeds a documented size cap.
    #[error("{what} supports at most {limit}, got {got}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// Two point configurations that must match in size do not.
    #[error("size mismatch: {left} vs {right} points")]
    SizeMismatch { left: usize, right: usize },

    /// The rejection sampler exhausted its proposal budget.
    #[error("rejection sampler hit its proposal budget ({proposals} proposals)")]
    RejectionBudget { proposals: usize },

    /// A sample file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of numerical routines, as opposed to bad input or IO.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Convergence { .. }
                | Error::Degenerate(_)
                | Error::TooLarge { .. }
                | Error::SizeMismatch { .. }
                | Error::RejectionBudget { .. }
        )
    }
}
