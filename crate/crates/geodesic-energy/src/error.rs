//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a documented precondition (dimension mismatch, bad index, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A problem description failed validation before any numerics ran.
    #[error("config error: {0}")]
    Config(String),

    /// A computation produced NaN/Inf or an otherwise unusable value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A length-rule objective was differentiated at a zero-velocity segment.
    #[error("nondifferentiable point: segment {segment} has near-zero velocity")]
    NondifferentiablePoint { segment: usize },

    /// The shooting oracle did not converge; callers fall back to
    /// energy-minimizer-only checks.
    #[error("oracle failure: {0}")]
    OracleFailure(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
