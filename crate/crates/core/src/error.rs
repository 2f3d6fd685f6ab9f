//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("mode index {mode} out of range (modes = {modes})")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite field value encountered at step {step}")]
    NonFinite { step: usize },

    #[error("amplitudes violate the reality condition: {0}")]
    RealityViolation(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("optimizer did not converge after {restarts} restarts (best energy {best})")]
    OptimizerNonConvergence { restarts: usize, best: f64 },

    #[error("state space too large to enumerate: {size} configurations (limit {limit})")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}
