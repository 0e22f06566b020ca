//! Most-likely heteroscedastic Gaussian process.
//!
//! Three models cooperate:
//!
//! 1. a homoscedastic GP fitted to the observations;
//! 2. a *noise GP* fitted to log empirical variances obtained by sampling the
//!    current model's predictive distribution at every training input;
//! 3. a *mean GP* conditioned on the observations with the per-point noise
//!    diagonal `r(x_i) = exp(noise GP mean at x_i)`.
//!
//! Steps 2–3 repeat with the newest combined model until the mean GP's
//! predictions at the training inputs stop moving.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gp::{self, default_init, Dataset, FitOptions, GpModel, Hyperparams};

/// Lower clamp on a sample variance before taking its log.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Something with an observation-level predictive distribution.
pub trait PredictiveModel {
    /// Predictive mean and variance of an *observation* at `x`.
    fn predictive(&self, x: &[f64]) -> Result<(f64, f64)>;
}

impl PredictiveModel for GpModel {
    fn predictive(&self, x: &[f64]) -> Result<(f64, f64)> {
        GpModel::predictive(self, x)
    }
}

/// Log empirical noise targets: `ẑ_i = log(s⁻¹ Σ_j ½ (z_i − z_i^j)²)` with
/// `z_i^j` drawn from `model`'s predictive distribution at `x_i`.
pub fn empirical_noise<M: PredictiveModel + ?Sized>(model: &M, data: &Dataset, s: usize, seed: u64) -> Result<Dataset> {
    if s < 2 {
        return Err(Error::Input(format!("need at least 2 samples per point, got {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::with_capacity(data.len());
    for (x, &z) in data.inputs().iter().zip(data.targets()) {
        let (mu, var) = model.predictive(x)?;
        let sd = var.max(0.0).sqrt();
        let acc: f64 = if sd > 0.0 {
            let dist = Normal::new(mu, sd).map_err(|e| Error::Input(e.to_string()))?;
            (0..s).map(|_| 0.5 * (z - dist.sample(&mut rng)).powi(2)).sum()
        } else {
            s as f64 * 0.5 * (z - mu).powi(2)
        };
        targets.push((acc / s as f64).max(VARIANCE_FLOOR).ln());
    }
    data.with_targets(targets)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlhgpConfig {
    /// Samples per point for the empirical noise estimate.
    pub samples: usize,
    pub max_iters: usize,
    /// Convergence threshold on the mean change; `None` means `1e-3·(max z − min z)`.
    pub tol: Option<f64>,
    /// Random restarts for each inner GP fit.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MlhgpConfig {
    fn default() -> Self {
        MlhgpConfig { samples: 100, max_iters: 10, tol: None, restarts: gp::DEFAULT_RESTARTS, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct MlhGpModel {
    mean_gp: GpModel,
    noise_gp: GpModel,
    r_diag: Vec<f64>,
    iterations_used: usize,
    converged: bool,
    final_change: f64,
}

impl MlhGpModel {
    /// Build the combined model from kernel hyperparameters and a fitted noise GP.
    pub fn assemble(data: &Dataset, kernel: &Hyperparams, noise_gp: GpModel) -> Result<Self> {
        let r_diag = noise_diag(&noise_gp, data)?;
        let mean_gp = GpModel::condition_heteroscedastic(data, kernel, &r_diag, true)?;
        Ok(MlhGpModel { mean_gp, noise_gp, r_diag, iterations_used: 0, converged: false, final_change: f64::NAN })
    }

    pub fn mean_gp(&self) -> &GpModel {
        &self.mean_gp
    }

    pub fn noise_gp(&self) -> &GpModel {
        &self.noise_gp
    }

    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Largest change of the mean at the training inputs in the last iteration.
    pub fn final_change(&self) -> f64 {
        self.final_change
    }

    /// Input-dependent noise variance `r(x)`.
    pub fn noise_variance(&self, x: &[f64]) -> Result<f64> {
        Ok(self.noise_gp.posterior(x)?.0.exp())
    }

    /// Latent mean and variance (without the noise term).
    pub fn latent_posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.mean_gp.posterior(x)
    }

    /// Mean and observation-level variance `K** + r(x) − K*(K+R)⁻¹K*ᵀ`.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (m, v) = self.mean_gp.posterior(x)?;
        Ok((m, v + self.noise_variance(x)?))
    }
}

impl PredictiveModel for MlhGpModel {
    fn predictive(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.posterior(x)
    }
}

fn noise_diag(noise_gp: &GpModel, data: &Dataset) -> Result<Vec<f64>> {
    data.inputs().iter().map(|x| Ok(noise_gp.posterior(x)?.0.exp())).collect()
}

fn means_at(model: &GpModel, data: &Dataset) -> Result<Vec<f64>> {
    data.inputs().iter().map(|x| Ok(model.posterior(x)?.0)).collect()
}

fn fit_opts(cfg: &MlhgpConfig, salt: u64) -> FitOptions {
    FitOptions { restarts: cfg.restarts, seed: cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt), standardize: true }
}

/// One noise-estimate → noise-GP → mean-GP pass starting from `current`.
fn refine<M: PredictiveModel + ?Sized>(
    current: &M,
    data: &Dataset,
    kernel_init: &Hyperparams,
    cfg: &MlhgpConfig,
    iteration: u64,
) -> Result<MlhGpModel> {
    let noise_data = empirical_noise(current, data, cfg.samples, cfg.seed.wrapping_add(1000 + iteration))?;
    let noise_gp = gp::fit_with(&noise_data, &default_init(&noise_data), fit_opts(cfg, 2 * iteration + 1))?;
    let r_diag = noise_diag(&noise_gp, data)?;
    let mean_gp = gp::fit_fixed_noise(data, kernel_init, &r_diag, fit_opts(cfg, 2 * iteration + 2))?;
    Ok(MlhGpModel { mean_gp, noise_gp, r_diag, iterations_used: 0, converged: false, final_change: f64::NAN })
}

/// Fit the heteroscedastic model, starting from a freshly fitted homoscedastic GP.
pub fn fit_mlhgp(data: &Dataset, cfg: &MlhgpConfig) -> Result<MlhGpModel> {
    if data.is_empty() {
        return Err(Error::Input("empty dataset".into()));
    }
    let base = gp::fit_with(data, &default_init(data), fit_opts(cfg, 0))?;
    fit_mlhgp_from(&base, cfg)
}

/// Fit the heteroscedastic model starting from an already fitted surrogate.
pub fn fit_mlhgp_from(base: &GpModel, cfg: &MlhgpConfig) -> Result<MlhGpModel> {
    if cfg.max_iters == 0 {
        return Err(Error::Input("max_iters must be at least 1".into()));
    }
    let data = base.data();
    let (lo, hi) = data.targets().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &z| (a.min(z), b.max(z)));
    let tol = cfg.tol.unwrap_or(1e-3 * (hi - lo));
    let kernel_init = Hyperparams { noise_variance: 0.0, ..*base.hyperparams() };

    let mut previous = means_at(base, data)?;
    let mut model = refine(base, data, &kernel_init, cfg, 1)?;
    for it in 1..=cfg.max_iters {
        if it > 1 {
            model = refine(&model, data, &kernel_init, cfg, it as u64)?;
        }
        let means = means_at(&model.mean_gp, data)?;
        let change = means.iter().zip(&previous).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        model.iterations_used = it;
        model.final_change = change;
        if change <= tol {
            model.converged = true;
            return Ok(model);
        }
        previous = means;
    }
    Ok(model)
}
