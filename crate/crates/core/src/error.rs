use thiserror::Error;

/// Errors raised by the estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FplmError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// No training curve lies within the bandwidth of the query curve.
    #[error("empty kernel neighborhood: nearest training curve at distance {nearest} (bandwidth {bandwidth})")]
    EmptyNeighborhood { nearest: f64, bandwidth: f64 },

    #[error("rank deficient: requested {requested} components, achievable rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, FplmError>;
