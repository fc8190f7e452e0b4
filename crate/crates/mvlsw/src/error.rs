//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its supported range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The inner-product operator is too ill-conditioned to invert.
    #[error("inner-product operator is numerically singular (condition number {condition:.3e})")]
    SingularOperator { condition: f64 },

    /// A stacked innovation covariance fails to be positive semi-definite.
    #[error(
        "innovation covariance at rescaled time u={u} is not positive semi-definite \
         (minimum eigenvalue {min_eigenvalue:.3e})"
    )]
    NotPositiveSemidefinite { u: f64, min_eigenvalue: f64 },

    /// A process specification violates its structural constraints.
    #[error("invalid process specification: {0}")]
    InvalidSpec(String),

    /// Two objects that must share a grid or configuration do not.
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    /// An operation over groups of surfaces received an empty group.
    #[error("empty group: {0}")]
    EmptyGroup(String),
}
