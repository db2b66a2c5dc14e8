//! Numerical workbench for translation-invariant Ising architectures:
//! effective circuits, second-moment operators, frustration-free gaps,
//! anticoncentration statistics and polynomial recovery.

pub mod anticonc;
pub mod arch;
pub mod avgcase;
pub mod exec;
pub mod field;
pub mod gap;
pub mod linalg;
pub mod moments;
pub mod pauli;
pub mod report;
pub mod sim;

pub use num_complex::Complex64 as C64;

/// Errors shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size over budget: {0}")]
    Budget(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("decoding failed: {0}")]
    DecodeFailure(String),
    #[error("ill-conditioned Gram matrix (condition number {0:e})")]
    IllConditioned(f64),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
