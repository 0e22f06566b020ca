//! Design storms and storm ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HydroError, Result};

/// Half-width of the arctan mass curve, as a fraction of the duration.
const SCS_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StormKind {
    /// Symmetric, sharply peaked mass curve resembling the SCS type II storm.
    ScsIiLike,
    Triangular,
    /// Constant intensity over the duration.
    Uniform,
}

impl std::str::FromStr for StormKind {
    type Err = HydroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scs_ii_like" => Ok(StormKind::ScsIiLike),
            "triangular" => Ok(StormKind::Triangular),
            "uniform" => Ok(StormKind::Uniform),
            _ => Err(HydroError::Input(format!("unknown storm kind `{s}`"))),
        }
    }
}

/// Spatially uniform hyetograph: rainfall intensity (m/s) per step, starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StormEvent {
    pub id: usize,
    pub timestep: f64,
    pub intensities: Vec<f64>,
}

impl StormEvent {
    pub fn new(id: usize, timestep: f64, intensities: Vec<f64>) -> Result<Self> {
        if !(timestep > 0.0 && timestep.is_finite()) {
            return Err(HydroError::Input(format!("timestep must be positive, got {timestep}")));
        }
        if intensities.iter().any(|i| !(*i >= 0.0 && i.is_finite())) {
            return Err(HydroError::Input("intensities must be finite and non-negative".into()));
        }
        Ok(StormEvent { id, timestep, intensities })
    }

    /// Total rainfall depth (m).
    pub fn depth(&self) -> f64 {
        self.intensities.iter().sum::<f64>() * self.timestep
    }

    /// Intensity during step `t`; zero after the event.
    pub fn intensity(&self, t: usize) -> f64 {
        self.intensities.get(t).copied().unwrap_or(0.0)
    }
}

pub(crate) fn steps(span: f64, timestep: f64, what: &str) -> Result<usize> {
    let n = (span / timestep).round();
    if n < 1.0 || ((n * timestep - span).abs() > 1e-9 * span.max(timestep)) {
        return Err(HydroError::Input(format!("{what} {span} s is not a positive multiple of the {timestep} s timestep")));
    }
    Ok(n as usize)
}

/// Hyetograph whose increments integrate exactly to `depth`.
pub fn generate_design_storm(kind: StormKind, depth: f64, duration: f64, timestep: f64) -> Result<StormEvent> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(HydroError::Input(format!("storm depth must be positive, got {depth}")));
    }
    if !(timestep > 0.0) || timestep > duration {
        return Err(HydroError::Input(format!("timestep {timestep} s must be in (0, duration {duration} s]")));
    }
    let n = steps(duration, timestep, "storm duration")?;
    let weights: Vec<f64> = match kind {
        StormKind::Uniform => vec![1.0; n],
        StormKind::Triangular => (0..n)
            .map(|k| {
                let t = (k as f64 + 0.5) / n as f64;
                1.0 - (2.0 * t - 1.0).abs()
            })
            .collect(),
        StormKind::ScsIiLike => {
            let norm = 2.0 * (0.5 / SCS_WIDTH).atan();
            let mass = |t: f64| 0.5 + ((t - 0.5) / SCS_WIDTH).atan() / norm;
            (0..n).map(|k| mass((k + 1) as f64 / n as f64) - mass(k as f64 / n as f64)).collect()
        }
    };
    let total: f64 = weights.iter().sum();
    let intensities = weights.into_iter().map(|w| w / total * depth / timestep).collect();
    StormEvent::new(0, timestep, intensities)
}

/// One storm burst of a possibly multi-burst event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Burst {
    pub kind: StormKind,
    /// m
    pub depth: f64,
    /// s
    pub duration: f64,
    /// Offset from the start of the simulation, s.
    #[serde(default)]
    pub start: f64,
}

/// Superpose bursts on a common timestep, each depth scaled by `scale`.
pub fn compose_bursts(id: usize, bursts: &[Burst], scale: f64, timestep: f64) -> Result<StormEvent> {
    if bursts.is_empty() {
        return Err(HydroError::Input("a storm needs at least one burst".into()));
    }
    let mut intensities: Vec<f64> = Vec::new();
    for b in bursts {
        let offset = if b.start == 0.0 { 0 } else { steps(b.start, timestep, "burst start")? };
        let ev = generate_design_storm(b.kind, b.depth * scale, b.duration, timestep)?;
        if intensities.len() < offset + ev.intensities.len() {
            intensities.resize(offset + ev.intensities.len(), 0.0);
        }
        for (k, v) in ev.intensities.iter().enumerate() {
            intensities[offset + k] += v;
        }
    }
    StormEvent::new(id, timestep, intensities)
}

/// Depth multipliers drawn log-uniformly from `spread`, one per event.
pub fn ensemble_factors(n: usize, spread: (f64, f64), seed: u64) -> Result<Vec<f64>> {
    let (lo, hi) = spread;
    if n == 0 {
        return Err(HydroError::Input("ensemble size must be at least 1".into()));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(HydroError::Input(format!("invalid spread [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            if lo == hi { lo } else { (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(lo, hi) }
        })
        .collect())
}

/// `n` events, ids `0..n`, with depths log-uniform in `[lo, hi]·base`.
pub fn generate_storm_ensemble(n: usize, base: &[Burst], spread: (f64, f64), timestep: f64, seed: u64) -> Result<Vec<StormEvent>> {
    ensemble_factors(n, spread, seed)?
        .into_iter()
        .enumerate()
        .map(|(id, f)| compose_bursts(id, base, f, timestep))
        .collect()
}
