use thiserror::Error;

/// Failures raised by the numerical building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("Bessel order {0} outside supported range 0..=3")]
    OrderOutOfRange(u32),
    #[error("Bessel argument {0} outside supported range")]
    ArgumentOutOfRange(f64),
    #[error("tridiagonal solve hit a zero pivot at row {0}")]
    ZeroPivot(usize),
    #[error("tridiagonal system is not diagonally dominant at row {0}")]
    NotDiagonallyDominant(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Errors shared by the model and estimator modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("validity violated at t = {time:.6e} s: {reason}")]
    Validity { time: f64, reason: String },
    #[error("boundary left the admissible range at t = {time:.6e} s (position {position:.6e} m)")]
    BoundaryExit { time: f64, position: f64 },
    #[error("surface balance root not found: {0}")]
    SurfaceSolve(String),
    #[error("numerical failure: {0}")]
    Numerics(#[from] NumericsError),
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// Physical admissibility failures, as opposed to numerical or input failures.
    pub fn is_validity_halt(&self) -> bool {
        matches!(self, Error::Validity { .. } | Error::BoundaryExit { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
