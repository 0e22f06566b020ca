//! Gaussian-process regression with an isotropic squared-exponential kernel.
//!
//! Targets are standardized (zero mean, unit variance) before conditioning and
//! predictions are mapped back to the original units, so a zero prior mean on
//! the standardized scale corresponds to a constant prior mean equal to the
//! sample mean of the targets. Hyperparameters are always reported in the
//! original target units.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::local::{minimize_box, LocalOptions};

/// Diagonal jitter always added to the kernel matrix.
pub const JITTER_FLOOR: f64 = 1e-10;
/// Largest jitter tried before giving up on a Cholesky factorization.
pub const JITTER_MAX: f64 = 1e-4;
/// Default number of random restarts for hyperparameter fitting.
pub const DEFAULT_RESTARTS: usize = 5;
/// Lower bound of the fitted lengthscale per unit of `√d`.
pub const MIN_LENGTHSCALE: f64 = 1e-2;
/// Upper bound of the fitted signal variance on the standardized scale.
pub const MAX_SIGNAL_VARIANCE: f64 = 1e2;

/// Kernel and noise hyperparameters `{σ², l, σ_n²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub signal_variance: f64,
    pub lengthscale: f64,
    pub noise_variance: f64,
}

impl Hyperparams {
    pub fn new(signal_variance: f64, lengthscale: f64, noise_variance: f64) -> Result<Self> {
        let h = Hyperparams { signal_variance, lengthscale, noise_variance };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(Error::Input(format!("signal variance must be positive, got {}", self.signal_variance)));
        }
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::Input(format!("lengthscale must be positive, got {}", self.lengthscale)));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::Input(format!("noise variance must be non-negative, got {}", self.noise_variance)));
        }
        Ok(())
    }
}

/// Observed decisions and their performance values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    storm_ids: Option<Vec<Option<usize>>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Input(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if let Some(first) = inputs.first() {
            let d = first.len();
            for x in &inputs {
                if x.len() != d {
                    return Err(Error::Dimension { expected: d, got: x.len() });
                }
                if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::Input(format!("input {x:?} outside the unit box")));
                }
            }
        }
        if targets.iter().any(|z| !z.is_finite()) {
            return Err(Error::Input("non-finite target".into()));
        }
        Ok(Dataset { inputs, targets, storm_ids: None })
    }

    pub fn with_storm_ids(mut self, ids: Vec<Option<usize>>) -> Result<Self> {
        if ids.len() != self.targets.len() {
            return Err(Error::Input("storm id count differs from target count".into()));
        }
        self.storm_ids = Some(ids);
        Ok(self)
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn storm_ids(&self) -> Option<&[Option<usize>]> {
        self.storm_ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Same inputs, new targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        Dataset::new(self.inputs.clone(), targets)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared-exponential covariance `σ² exp(-‖x - x2‖² / 2l²)`.
pub fn kernel_se(x: &[f64], x2: &[f64], h: &Hyperparams) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::Dimension { expected: x.len(), got: x2.len() });
    }
    h.validate()?;
    Ok(h.signal_variance * (-sq_dist(x, x2) / (2.0 * h.lengthscale * h.lengthscale)).exp())
}

/// Affine map between original targets and their standardized form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub offset: f64,
    pub scale: f64,
}

impl Standardizer {
    pub const IDENTITY: Standardizer = Standardizer { offset: 0.0, scale: 1.0 };

    pub fn from_targets(z: &[f64]) -> Self {
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = if var > 0.0 && var.is_finite() { var.sqrt() } else { 1.0 };
        Standardizer { offset: mean, scale }
    }

    pub fn forward(&self, z: f64) -> f64 {
        (z - self.offset) / self.scale
    }
}

/// Observation noise on the standardized scale.
#[derive(Debug, Clone, PartialEq)]
enum Noise {
    Uniform(f64),
    PerPoint(Vec<f64>),
}

impl Noise {
    fn at(&self, i: usize) -> f64 {
        match self {
            Noise::Uniform(v) => *v,
            Noise::PerPoint(r) => r[i],
        }
    }
}

struct Factor {
    chol: DMatrix<f64>,
    jitter: f64,
}

/// Cholesky of `K + diag(noise) + jitter·I`, escalating jitter ×10 from the floor.
fn factorize(kernel: &DMatrix<f64>, noise: &Noise) -> Option<Factor> {
    let n = kernel.nrows();
    let mut jitter = JITTER_FLOOR;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut kz = kernel.clone();
        for i in 0..n {
            kz[(i, i)] += noise.at(i) + jitter;
        }
        if let Some(c) = kz.cholesky() {
            return Some(Factor { chol: c.l(), jitter });
        }
        jitter *= 10.0;
    }
    None
}

fn kernel_matrix(sqd: &DMatrix<f64>, signal: f64, lengthscale: f64) -> DMatrix<f64> {
    let inv = 1.0 / (2.0 * lengthscale * lengthscale);
    sqd.map(|d| signal * (-d * inv).exp())
}

fn sq_dist_matrix(inputs: &[Vec<f64>]) -> DMatrix<f64> {
    let n = inputs.len();
    DMatrix::from_fn(n, n, |i, j| sq_dist(&inputs[i], &inputs[j]))
}

fn lml_from_factor(f: &Factor, y: &DVector<f64>) -> (f64, DVector<f64>) {
    let n = y.len() as f64;
    let tmp = f.chol.solve_lower_triangular(y).expect("triangular factor is non-singular");
    let alpha = f.chol.tr_solve_lower_triangular(&tmp).expect("triangular factor is non-singular");
    let logdet_half: f64 = f.chol.diagonal().iter().map(|d| d.ln()).sum();
    let lml = -0.5 * y.dot(&alpha) - logdet_half - 0.5 * n * (2.0 * PI).ln();
    (lml, alpha)
}

/// Log marginal likelihood of zero-mean targets (no standardization):
/// `-½ zᵀK_z⁻¹z - ½ log|K_z| - (n/2) log 2π`, `K_z = K + σ_n² I`.
pub fn log_marginal_likelihood(data: &Dataset, h: &Hyperparams) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Input("empty dataset".into()));
    }
    h.validate()?;
    let sqd = sq_dist_matrix(&data.inputs);
    let k = kernel_matrix(&sqd, h.signal_variance, h.lengthscale);
    let f = factorize(&k, &Noise::Uniform(h.noise_variance))
        .ok_or(Error::NotPositiveDefinite { hyperparams: *h, jitter: JITTER_MAX })?;
    let y = DVector::from_column_slice(&data.targets);
    Ok(lml_from_factor(&f, &y).0)
}

/// The criterion [`fit`] maximizes: the log marginal likelihood of the
/// standardized targets under `h` expressed in original units.
pub fn standardized_lml(data: &Dataset, h: &Hyperparams) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Input("empty dataset".into()));
    }
    h.validate()?;
    let st = Standardizer::from_targets(&data.targets);
    let s2 = st.scale * st.scale;
    let y = DVector::from_iterator(data.len(), data.targets.iter().map(|z| st.forward(*z)));
    let sqd = sq_dist_matrix(&data.inputs);
    let k = kernel_matrix(&sqd, h.signal_variance / s2, h.lengthscale);
    let f = factorize(&k, &Noise::Uniform(h.noise_variance / s2))
        .ok_or(Error::NotPositiveDefinite { hyperparams: *h, jitter: JITTER_MAX })?;
    Ok(lml_from_factor(&f, &y).0)
}

/// A conditioned Gaussian process. Immutable once built.
#[derive(Debug, Clone)]
pub struct GpModel {
    hyperparams: Hyperparams,
    data: Dataset,
    standardizer: Standardizer,
    noise: Noise,
    jitter: f64,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    lml: f64,
}

impl GpModel {
    /// Condition on `data` with fixed hyperparameters (homoscedastic noise).
    pub fn condition(data: &Dataset, h: &Hyperparams, standardize: bool) -> Result<Self> {
        Self::build(data, h, None, standardize)
    }

    /// Condition with a per-point noise variance (original units) instead of
    /// `h.noise_variance`.
    pub fn condition_heteroscedastic(
        data: &Dataset,
        h: &Hyperparams,
        noise_diag: &[f64],
        standardize: bool,
    ) -> Result<Self> {
        if noise_diag.len() != data.len() {
            return Err(Error::Input("noise diagonal length differs from dataset".into()));
        }
        if noise_diag.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::Input("noise diagonal must be finite and non-negative".into()));
        }
        Self::build(data, h, Some(noise_diag), standardize)
    }

    fn build(data: &Dataset, h: &Hyperparams, noise_diag: Option<&[f64]>, standardize: bool) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Input("empty dataset".into()));
        }
        h.validate()?;
        let st = if standardize { Standardizer::from_targets(&data.targets) } else { Standardizer::IDENTITY };
        let s2 = st.scale * st.scale;
        let noise = match noise_diag {
            None => Noise::Uniform(h.noise_variance / s2),
            Some(r) => Noise::PerPoint(r.iter().map(|v| v / s2).collect()),
        };
        let sqd = sq_dist_matrix(&data.inputs);
        let k = kernel_matrix(&sqd, h.signal_variance / s2, h.lengthscale);
        let f = factorize(&k, &noise).ok_or(Error::NotPositiveDefinite { hyperparams: *h, jitter: JITTER_MAX })?;
        let y = DVector::from_iterator(data.len(), data.targets.iter().map(|z| st.forward(*z)));
        let (lml, alpha) = lml_from_factor(&f, &y);
        Ok(GpModel {
            hyperparams: *h,
            data: data.clone(),
            standardizer: st,
            noise,
            jitter: f.jitter,
            chol: f.chol,
            alpha,
            lml,
        })
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn standardizer(&self) -> Standardizer {
        self.standardizer
    }

    /// Lower Cholesky factor of the standardized `K + noise + jitter·I`.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `(K + noise + jitter·I)⁻¹ y` on the standardized scale.
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn lml(&self) -> f64 {
        self.lml
    }

    /// The standardized `K + noise + jitter·I` the factor was computed from.
    pub fn kz_matrix(&self) -> DMatrix<f64> {
        let s2 = self.standardizer.scale.powi(2);
        let sqd = sq_dist_matrix(&self.data.inputs);
        let mut k = kernel_matrix(&sqd, self.hyperparams.signal_variance / s2, self.hyperparams.lengthscale);
        for i in 0..k.nrows() {
            k[(i, i)] += self.noise.at(i) + self.jitter;
        }
        k
    }

    /// Per-point observation noise in original units.
    pub fn noise_diag(&self) -> Vec<f64> {
        let s2 = self.standardizer.scale.powi(2);
        (0..self.data.len()).map(|i| self.noise.at(i) * s2).collect()
    }

    fn cross_kernel(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        let s2 = self.standardizer.scale.powi(2);
        let sig = self.hyperparams.signal_variance / s2;
        let inv = 1.0 / (2.0 * self.hyperparams.lengthscale.powi(2));
        Ok(DVector::from_iterator(
            self.data.len(),
            self.data.inputs.iter().map(|xi| sig * (-sq_dist(x, xi) * inv).exp()),
        ))
    }

    /// Latent posterior mean and variance before clamping, original units.
    pub fn posterior_unclamped(&self, x: &[f64]) -> Result<(f64, f64)> {
        let ks = self.cross_kernel(x)?;
        let s2 = self.standardizer.scale.powi(2);
        let mean = ks.dot(&self.alpha);
        let v = self.chol.solve_lower_triangular(&ks).expect("triangular factor is non-singular");
        let var = self.hyperparams.signal_variance / s2 - v.dot(&v);
        Ok((self.standardizer.offset + self.standardizer.scale * mean, var * s2))
    }

    /// Latent posterior mean and variance, variance clamped at zero.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (m, v) = self.posterior_unclamped(x)?;
        Ok((m, v.max(0.0)))
    }

    /// Posterior mean and variance with their gradients with respect to `x`.
    pub fn posterior_with_gradient(&self, x: &[f64]) -> Result<(f64, f64, Vec<f64>, Vec<f64>)> {
        let ks = self.cross_kernel(x)?;
        let d = self.dim();
        let st = self.standardizer;
        let s2 = st.scale * st.scale;
        let l2 = self.hyperparams.lengthscale.powi(2);
        let v = self.chol.solve_lower_triangular(&ks).expect("triangular factor is non-singular");
        let w = self.chol.tr_solve_lower_triangular(&v).expect("triangular factor is non-singular");
        let mean = ks.dot(&self.alpha);
        let var = self.hyperparams.signal_variance / s2 - v.dot(&v);
        let mut dmean = vec![0.0; d];
        let mut dvar = vec![0.0; d];
        for (i, xi) in self.data.inputs.iter().enumerate() {
            for k in 0..d {
                // ∂k(x, x_i)/∂x_k
                let dk = -ks[i] * (x[k] - xi[k]) / l2;
                dmean[k] += self.alpha[i] * dk;
                dvar[k] -= 2.0 * w[i] * dk;
            }
        }
        let clamped = var.max(0.0);
        if var <= 0.0 {
            dvar.iter_mut().for_each(|g| *g = 0.0);
        }
        Ok((
            st.offset + st.scale * mean,
            clamped * s2,
            dmean.into_iter().map(|g| g * st.scale).collect(),
            dvar.into_iter().map(|g| g * s2).collect(),
        ))
    }

    /// Posterior mean plus homoscedastic observation noise `σ_n²`.
    pub fn predictive(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (m, v) = self.posterior(x)?;
        Ok((m, v + self.hyperparams.noise_variance))
    }
}

/// Settings for [`fit_with`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Random log-uniform restarts in addition to the supplied initialization.
    pub restarts: usize,
    pub seed: u64,
    pub standardize: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { restarts: DEFAULT_RESTARTS, seed: 0, standardize: true }
    }
}

/// Search box for the log-transformed hyperparameters on the standardized scale.
struct LogBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn log_bounds(dim: usize, with_noise: bool) -> LogBounds {
    let sd = (dim.max(1) as f64).sqrt();
    // Inputs live in the unit box. Lengthscales far below the sample spacing
    // let the model thread every noisy observation with its own bump.
    let mut lower = vec![1e-4_f64.ln(), (MIN_LENGTHSCALE * sd).ln()];
    // Targets are standardized, so a signal far above unit variance only
    // serves to fit heavy-tailed outliers with steep bumps.
    let mut upper = vec![MAX_SIGNAL_VARIANCE.ln(), (20.0 * sd).ln()];
    if with_noise {
        lower.push(1e-9_f64.ln());
        upper.push(10.0_f64.ln());
    }
    LogBounds { lower, upper }
}

/// LML and its gradient with respect to log hyperparameters.
///
/// `p = [log σ², log l, log σ_n²]` for uniform noise, or `[log σ², log l]`
/// when a fixed per-point noise diagonal is supplied.
fn lml_and_grad(sqd: &DMatrix<f64>, y: &DVector<f64>, p: &[f64], fixed_noise: Option<&[f64]>) -> Option<(f64, Vec<f64>)> {
    let signal = p[0].exp();
    let ls = p[1].exp();
    let noise = match fixed_noise {
        None => Noise::Uniform(p[2].exp()),
        Some(r) => Noise::PerPoint(r.to_vec()),
    };
    let k = kernel_matrix(sqd, signal, ls);
    let f = factorize(&k, &noise)?;
    let (lml, alpha) = lml_from_factor(&f, y);
    if !lml.is_finite() {
        return None;
    }
    let n = y.len();
    let linv = f.chol.solve_lower_triangular(&DMatrix::identity(n, n))?;
    let kinv = linv.transpose() * &linv;
    let l2 = ls * ls;
    let mut g_signal = 0.0;
    let mut g_ls = 0.0;
    let mut trace_a = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = alpha[i] * alpha[j] - kinv[(i, j)];
            g_signal += a * k[(i, j)];
            g_ls += a * k[(i, j)] * sqd[(i, j)] / l2;
            if i == j {
                trace_a += a;
            }
        }
    }
    let mut grad = vec![0.5 * g_signal, 0.5 * g_ls];
    if fixed_noise.is_none() {
        grad.push(0.5 * p[2].exp() * trace_a);
    }
    Some((lml, grad))
}

/// Log marginal likelihood gradient with respect to `[log σ², log l, log σ_n²]`
/// on the standardized scale. Exposed for finite-difference checking.
pub fn lml_gradient(data: &Dataset, h: &Hyperparams) -> Result<(f64, Vec<f64>)> {
    let st = Standardizer::from_targets(&data.targets);
    let s2 = st.scale * st.scale;
    let y = DVector::from_iterator(data.len(), data.targets.iter().map(|z| st.forward(*z)));
    let sqd = sq_dist_matrix(&data.inputs);
    let p = [(h.signal_variance / s2).ln(), h.lengthscale.ln(), (h.noise_variance / s2).ln()];
    lml_and_grad(&sqd, &y, &p, None).ok_or(Error::NotPositiveDefinite { hyperparams: *h, jitter: JITTER_MAX })
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln())
}

/// Fit hyperparameters by maximizing the log marginal likelihood.
pub fn fit(data: &Dataset, init: &Hyperparams, restarts: usize) -> Result<GpModel> {
    fit_with(data, init, FitOptions { restarts, ..Default::default() })
}

pub fn fit_with(data: &Dataset, init: &Hyperparams, opts: FitOptions) -> Result<GpModel> {
    fit_impl(data, init, None, opts)
}

/// Fit signal variance and lengthscale with a fixed per-point noise diagonal
/// (original units). The returned model's `noise_variance` is zero; the
/// diagonal lives in the model.
pub fn fit_fixed_noise(data: &Dataset, init: &Hyperparams, noise_diag: &[f64], opts: FitOptions) -> Result<GpModel> {
    if noise_diag.len() != data.len() {
        return Err(Error::Input("noise diagonal length differs from dataset".into()));
    }
    fit_impl(data, init, Some(noise_diag), opts)
}

fn fit_impl(data: &Dataset, init: &Hyperparams, noise_diag: Option<&[f64]>, opts: FitOptions) -> Result<GpModel> {
    if data.is_empty() {
        return Err(Error::Input("empty dataset".into()));
    }
    init.validate()?;
    let st = if opts.standardize { Standardizer::from_targets(&data.targets) } else { Standardizer::IDENTITY };
    let s2 = st.scale * st.scale;
    let y = DVector::from_iterator(data.len(), data.targets.iter().map(|z| st.forward(*z)));
    let sqd = sq_dist_matrix(&data.inputs);
    let fixed: Option<Vec<f64>> = noise_diag.map(|r| r.iter().map(|v| v / s2).collect());
    let with_noise = fixed.is_none();
    let bounds = log_bounds(data.dim(), with_noise);

    let objective = |p: &[f64]| -> (f64, Vec<f64>) {
        match lml_and_grad(&sqd, &y, p, fixed.as_deref()) {
            Some((v, g)) => (-v, g.into_iter().map(|x| -x).collect()),
            None => (f64::INFINITY, vec![0.0; p.len()]),
        }
    };

    let to_log = |h: &Hyperparams| -> Vec<f64> {
        let mut p = vec![(h.signal_variance / s2).ln(), h.lengthscale.ln()];
        if with_noise {
            p.push((h.noise_variance.max(1e-300) / s2).ln());
        }
        p
    };

    let mut starts = vec![to_log(init)];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sd = (data.dim().max(1) as f64).sqrt();
    for _ in 0..opts.restarts {
        let mut p = vec![log_uniform(&mut rng, 1e-3, 1e3), log_uniform(&mut rng, MIN_LENGTHSCALE * sd, 2.0 * sd)];
        if with_noise {
            p.push(log_uniform(&mut rng, 1e-6, 1.0));
        }
        starts.push(p);
    }

    // The unmodified initialization is itself a candidate.
    let mut best: Option<(f64, Vec<f64>)> = None;
    let init_val = objective(&starts[0]).0;
    if init_val.is_finite() {
        best = Some((init_val, starts[0].clone()));
    }
    let local = LocalOptions { max_iters: 200, gtol: 1e-6, ftol: 1e-10 };
    for s in &starts {
        let r = minimize_box(objective, s, &bounds.lower, &bounds.upper, local);
        if r.value.is_finite() && best.as_ref().is_none_or(|(v, _)| r.value < *v) {
            best = Some((r.value, r.x));
        }
    }

    let (_, p) = best.ok_or(Error::NotPositiveDefinite { hyperparams: *init, jitter: JITTER_MAX })?;
    let h = Hyperparams {
        signal_variance: p[0].exp() * s2,
        lengthscale: p[1].exp(),
        noise_variance: if with_noise { p[2].exp() * s2 } else { 0.0 },
    };
    GpModel::build(data, &h, noise_diag, opts.standardize)
}

/// A data-scaled starting point for fitting.
pub fn default_init(data: &Dataset) -> Hyperparams {
    let st = Standardizer::from_targets(data.targets());
    let var = st.scale * st.scale;
    Hyperparams {
        signal_variance: var,
        lengthscale: 0.2 * (data.dim().max(1) as f64).sqrt(),
        noise_variance: 1e-4 * var,
    }
}
