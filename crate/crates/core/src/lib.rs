//! Surrogate-model optimization of open-loop control decisions.
//!
//! The crate is organised bottom-up:
//!
//! * [`gp`] – Gaussian-process regression with an isotropic squared-exponential
//!   kernel, Cholesky-based posterior and log-marginal-likelihood fitting.
//! * [`acquisition`] – closed-form expected improvement and its multi-start
//!   maximization over the unit box.
//! * [`mlhgp`] – most-likely heteroscedastic GP for input-dependent noise.
//! * [`optimizer`] – the Bayesian-optimization loop, a real-coded genetic
//!   algorithm, random search and the multi-seed comparison protocol.
//!
//! Control decisions are plain `f64` vectors with every coordinate in `[0, 1]`.

pub mod acquisition;
pub mod error;
pub mod gp;
pub mod local;
pub mod mlhgp;
pub mod normal;
pub mod optimizer;

pub use error::{Error, Result};
pub use gp::{Dataset, GpModel, Hyperparams};
pub use mlhgp::{MlhGpModel, MlhgpConfig};
pub use optimizer::{Evaluation, Objective, Trace};

/// A vector of fractional valve/dam openings in `[0, 1]^d`.
pub type Decision = Vec<f64>;
