use thiserror::Error;

/// Errors raised by the symbolic and numeric layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("missing direction tuple {0}")]
    MissingDirection(&'static str),

    #[error("border does not cover word {0}")]
    UncoveredChip(String),

    #[error("border would have {0} entries, above the limit of {1}")]
    SizeGuard(u128, u128),

    #[error("polynomial is not symmetric")]
    NotSymmetric,

    #[error("x-degree {found} exceeds the allowed maximum {max}")]
    DegreeTooHigh { found: i64, max: i64 },

    #[error("refused: {0}")]
    Refused(String),

    #[error("linearly dependent input: {0}")]
    Dependent(String),

    #[error("continuation failed: {0}")]
    Continuation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
