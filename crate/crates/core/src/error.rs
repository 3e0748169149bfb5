use thiserror::Error;

/// Errors raised when building or running any of the models in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates one of the model invariants.
    #[error("{0}")]
    InvalidParameter(String),

    /// The antagonist spring was asked for with a non-positive recorded maximum.
    #[error("maximum displacement must be positive, got {0}")]
    NonPositiveMaxDisplacement(f64),

    /// The desired force is zero where the search step divides by it.
    #[error("desired force must be non-zero")]
    ZeroDesiredForce,

    /// The simulated state left the admissible range.
    #[error("simulation diverged at t = {t:.6} s (x = {x:e}, x_dot = {x_dot:e})")]
    Diverged { t: f64, x: f64, x_dot: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
