use thiserror::Error;

/// Errors surfaced by the model, the detectors, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Eq.-level degenerate input, e.g. a zero column with zero regularization.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("user {user} is not in the candidate set")]
    NotInCandidateSet { user: usize },

    #[error("cannot discard {requested} users from a candidate set of {available}")]
    PruneTooLarge { requested: usize, available: usize },

    #[error("invalid pruning schedule: {0}")]
    InvalidSchedule(String),

    /// More detected users than observations per slot; LS refinement is undefined.
    #[error("support size {support} exceeds observation length {n}")]
    SupportTooLarge { support: usize, n: usize },

    #[error("complexity ledger mismatch: {0}")]
    LedgerMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
