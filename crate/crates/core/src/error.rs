use thiserror::Error;

/// Failures of the exact / series computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("tolerance {requested:e} is below what this scalar type can certify (best bound {achievable:e})")]
    ToleranceUnattainable { requested: f64, achievable: f64 },
    #[error("sequence index {index} outside supported range 1..={cap}")]
    IndexOutOfRange { index: usize, cap: usize },
    #[error("truncation level {0} too small (need at least 5)")]
    TruncationTooSmall(usize),
    #[error("balance equations are singular at column {0}")]
    SingularSystem(usize),
    #[error("two evaluation routes disagree: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = NumericError> = std::result::Result<T, E>;

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(NumericError::InvalidTolerance(tol))
    }
}
