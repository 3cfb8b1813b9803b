use thiserror::Error;

#[derive(Debug, Error)]
pub enum PxpError {
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("invalid site (j={j}, a={a}) for {legs} leg(s) and L={rungs}")]
    InvalidSite {
        j: usize,
        a: usize,
        legs: usize,
        rungs: usize,
    },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("state {name} incompatible with L={rungs}: {reason}")]
    IncompatibleState {
        name: String,
        rungs: usize,
        reason: String,
    },
    #[error("dimension {dim} exceeds the dense cap {cap}; use a smaller N or a momentum sector")]
    CapacityExceeded { dim: usize, cap: usize },
    #[error("basis mismatch: expected dimension {expected}, found {found}")]
    BasisMismatch { expected: usize, found: usize },
    #[error("norm drift {drift:.3e} exceeds budget {budget:.1e}; reduce dt")]
    DriftExceeded { drift: f64, budget: f64 },
    #[error("reduced density matrix trace {trace} deviates from 1")]
    TraceNotNormalized { trace: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PxpError>;
