use thiserror::Error;

/// Errors raised by the density, risk and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An inverse moment (or a quantity built from one) diverges for this law.
    #[error("divergent moment: {0}")]
    Divergent(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("estimator does not exist: {0}")]
    Nonexistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Importance sampling degenerated (effective sample size too small).
    #[error("unreliable estimate: effective sample size {ess:.1} out of {n}")]
    Unreliable { ess: f64, n: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("probe range exhausted: condition not met for p <= {0}")]
    ProbeExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
