//! Expected improvement and its maximization over the unit box.
//!
//! The surrogate is fitted to a metric that is *minimized*. Expected
//! improvement is evaluated in maximization form on the negated metric: the
//! internal objective is `g = -z`, the incumbent is `f* = max_i E[g(x_i)]`
//! over the observed inputs, and `Δ(x) = E[g(x)] - f*`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

use crate::error::Result;
use crate::gp::GpModel;
use crate::local::{minimize_box, LocalOptions};
use crate::normal;

/// EI values closer than this to the best are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionConfig {
    /// Multi-start local searches; `None` means `10·d`.
    pub n_starts: Option<usize>,
    /// Grid points per dimension for the pre-scan when `d ≤ 2` (0 disables it).
    pub grid_fallback: usize,
    /// Iteration cap for each local ascent.
    pub local_iters: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        AcquisitionConfig { n_starts: None, grid_fallback: 201, local_iters: 60 }
    }
}

/// Closed-form expected improvement `E[(f - f*)⁺]`, `f ~ N(mu, sigma²)`.
///
/// Written as `[Δ]⁺ + σφ(Δ/σ) - |Δ|Φ(-|Δ|/σ)` with `Δ = mu - incumbent`.
pub fn expected_improvement(mu: f64, sigma: f64, incumbent: f64) -> f64 {
    let delta = mu - incumbent;
    if sigma <= 0.0 || !sigma.is_finite() {
        return delta.max(0.0);
    }
    let u = delta / sigma;
    let ei = delta.max(0.0) + sigma * normal::pdf(u) - delta.abs() * normal::cdf(-delta.abs() / sigma);
    ei.max(0.0)
}

/// `(EI, ∂EI/∂Δ, ∂EI/∂σ)`.
fn ei_with_partials(delta: f64, sigma: f64) -> (f64, f64, f64) {
    if sigma <= 0.0 {
        return (delta.max(0.0), if delta > 0.0 { 1.0 } else { 0.0 }, 0.0);
    }
    let u = delta / sigma;
    let ei = delta.max(0.0) + sigma * normal::pdf(u) - delta.abs() * normal::cdf(-delta.abs() / sigma);
    (ei.max(0.0), normal::cdf(u), normal::pdf(u))
}

/// Best surrogate value among the observed inputs, in maximization form.
pub fn incumbent(model: &GpModel) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for x in model.data().inputs() {
        let (mu, _) = model.posterior(x)?;
        best = best.max(-mu);
    }
    Ok(best)
}

/// Expected improvement of the negated metric at `x`.
pub fn ei_at(model: &GpModel, x: &[f64], incumbent: f64) -> Result<f64> {
    let (mu, var) = model.posterior(x)?;
    Ok(expected_improvement(-mu, var.sqrt(), incumbent))
}

fn ei_and_grad(model: &GpModel, x: &[f64], incumbent: f64) -> (f64, Vec<f64>) {
    let (mu, var, dmu, dvar) = model.posterior_with_gradient(x).expect("dimension checked by caller");
    let sigma = var.sqrt();
    let (ei, d_delta, d_sigma) = ei_with_partials(-mu - incumbent, sigma);
    let grad = dmu
        .iter()
        .zip(&dvar)
        .map(|(dm, dv)| {
            let dsig = if sigma > 0.0 { dv / (2.0 * sigma) } else { 0.0 };
            -d_delta * dm + d_sigma * dsig
        })
        .collect();
    (ei, grad)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Pick the best candidate, breaking near-ties by the lexicographically smallest decision.
pub fn select_best(candidates: &[(Vec<f64>, f64)]) -> Option<(Vec<f64>, f64)> {
    let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .filter(|c| c.1 >= best - TIE_TOLERANCE)
        .min_by(|a, b| lexicographic(&a.0, &b.0))
        .cloned()
}

fn grid_points(d: usize, per_dim: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_dim).map(|i| i as f64 / (per_dim - 1) as f64).collect();
    match d {
        1 => axis.iter().map(|&a| vec![a]).collect(),
        2 => axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect(),
        _ => Vec::new(),
    }
}

/// Find the decision in `[0,1]^d` that maximizes expected improvement.
///
/// Deterministic for a given model, configuration, incumbent and seed.
pub fn maximize(model: &GpModel, cfg: &AcquisitionConfig, incumbent: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_starts = cfg.n_starts.unwrap_or(10 * d).max(1);
    let mut starts: Vec<Vec<f64>> = (0..n_starts).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();

    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    if d <= 2 && cfg.grid_fallback >= 2 {
        let mut scored: Vec<(Vec<f64>, f64)> = grid_points(d, cfg.grid_fallback)
            .into_iter()
            .map(|x| {
                let v = ei_at(model, &x, incumbent)?;
                Ok((x, v))
            })
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| lexicographic(&a.0, &b.0)));
        starts.extend(scored.iter().take(5).map(|c| c.0.clone()));
        candidates.extend(scored.into_iter().take(5));
    }

    let lower = vec![0.0; d];
    let upper = vec![1.0; d];
    let opts = LocalOptions { max_iters: cfg.local_iters, gtol: 1e-12, ftol: 1e-14 };
    for s in &starts {
        let start_ei = ei_at(model, s, incumbent)?;
        candidates.push((s.clone(), start_ei));
        let r = minimize_box(
            |x| {
                let (v, g) = ei_and_grad(model, x, incumbent);
                (-v, g.into_iter().map(|v| -v).collect())
            },
            s,
            &lower,
            &upper,
            opts,
        );
        let v = ei_at(model, &r.x, incumbent)?;
        candidates.push((r.x, v));
    }

    Ok(select_best(&candidates).expect("at least one start"))
}
