//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by validation, estimation, and experiment plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("sample budget {requested} exceeds configured maximum {max}")]
    BudgetExceeded { requested: u64, max: u64 },

    #[error("coupling dimension {dim} exceeds supported maximum {max}")]
    UnsupportedDimension { dim: usize, max: usize },

    #[error("no atom accepted within budget of {0} atoms")]
    NoAtomAccepted(usize),

    #[error("density mass outside the truncation box exceeds {allowed} (estimated {estimated})")]
    DensityNotEnclosed { estimated: f64, allowed: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("experiment '{name}' failed: {message}")]
    Experiment { name: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
