use thiserror::Error;

/// Errors produced by the simulation and estimation routines.
#[derive(Debug, Error)]
pub enum FusionError {
    #[error("unnormalized state: trace {trace}")]
    UnnormalizedState { trace: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid qubit index {0}, expected 1 or 2")]
    InvalidQubit(usize),
    #[error("invalid process matrix: {0}")]
    InvalidChi(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("incomplete settings, missing: {}", .0.join(", "))]
    IncompleteSettings(Vec<String>),
    #[error("table contains no counts")]
    ZeroCounts,
    #[error("zero transmitted total for {0}")]
    ZeroTransmitted(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("process model violation: {0}")]
    Inconsistent(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = FusionError> = std::result::Result<T, E>;
