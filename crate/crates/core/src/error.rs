use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("comb has no nonzero weight")]
    ZeroMass,

    #[error("comb is empty")]
    EmptyComb,

    #[error("comb is not normalized: total |mass| = {0}")]
    NotNormalized(f64),

    #[error("comb is not a distribution: {0}")]
    NotDistribution(String),

    #[error("index count {count} exceeds cap {cap}")]
    IndexCapExceeded { count: u128, cap: usize },

    #[error("index sets differ")]
    IndexSetMismatch,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure in LP solver: {0}")]
    Numerical(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("retries exhausted after {attempts} attempts: {detail}")]
    RetriesExhausted { attempts: usize, detail: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
