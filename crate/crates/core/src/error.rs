use thiserror::Error;

use crate::gp::Hyperparams;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("kernel matrix not positive definite after jitter escalation (hyperparams {hyperparams:?}, jitter {jitter:e})")]
    NotPositiveDefinite { hyperparams: Hyperparams, jitter: f64 },

    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

pub type Result<T> = std::result::Result<T, Error>;
