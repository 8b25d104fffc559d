use rsma_conic::ConicError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("user index {index} out of range for {num_users} users")]
    UserOutOfRange { index: usize, num_users: usize },
    #[error("slot {t} precedes timestamp {v}")]
    TimestampAhead { t: u64, v: u64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible initialization: the first convex subproblem has no solution ({0})")]
    InfeasibleInitialization(String),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
