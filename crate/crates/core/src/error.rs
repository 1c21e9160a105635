use thiserror::Error;

/// Errors raised by the library. Operator indices in messages are 1-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator does not conform to the algebra: {0}")]
    Conformance(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("operator {index} is not unitary (defect {defect:.3e} > {tol:.3e})")]
    NotUnitary { index: usize, defect: f64, tol: f64 },

    #[error("operator {index} is not a symmetry (defect {defect:.3e} > {tol:.3e})")]
    NotSymmetry { index: usize, defect: f64, tol: f64 },

    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
