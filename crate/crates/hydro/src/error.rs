use thiserror::Error;

#[derive(Debug, Error)]
pub enum HydroError {
    #[error("invalid network: {0}")]
    Network(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unstable step {step} at node {node} even with {substeps} substeps")]
    Unstable { step: usize, node: String, substeps: usize },
    #[error("unknown scenario `{0}` (expected gamma, epsilon or theta)")]
    UnknownScenario(String),
    #[error("cannot load scenario config {path}: {reason}")]
    Load { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, HydroError>;
