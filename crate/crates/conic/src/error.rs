use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("variable index {index} out of range for program with {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, found: usize },
    #[error("solve tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("backend rejected the program: {0}")]
    Backend(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
