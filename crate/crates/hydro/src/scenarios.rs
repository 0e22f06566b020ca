//! Performance metrics and the gamma, epsilon and theta scenario bundles.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stormbo_core::optimizer::{Evaluation, Objective};

use crate::error::{HydroError, Result};
use crate::hydrosim::{simulate, NetworkTopology, SimResult};
use crate::storm::{compose_bursts, generate_storm_ensemble, Burst, StormEvent};

/// Environment variable naming a directory of `<id>.toml` scenario files.
pub const SCENARIO_DIR_ENV: &str = "STORMBO_SCENARIO_DIR";
pub const SCENARIO_IDS: [&str; 3] = ["gamma", "epsilon", "theta"];

const EMBEDDED: [(&str, &str); 3] = [
    ("gamma", include_str!("../../../scenarios/gamma.toml")),
    ("epsilon", include_str!("../../../scenarios/epsilon.toml")),
    ("theta", include_str!("../../../scenarios/theta.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricParams {
    /// λ, m³/s. Gamma flow threshold; theta outflow threshold.
    #[serde(default = "default_flow")]
    pub flow_threshold: f64,
    /// kg/s
    #[serde(default = "default_load")]
    pub load_threshold: f64,
    /// Penalty per metre of final depth.
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
    /// Penalty per flooded node-step in epsilon.
    #[serde(default = "default_flood_penalty")]
    pub flood_penalty: f64,
    /// Theta steps with inflow at or below this (m³/s) do not accrue.
    #[serde(default = "default_inflow_eps")]
    pub inflow_epsilon: f64,
}

fn default_flow() -> f64 {
    0.11
}
fn default_load() -> f64 {
    1.075
}
fn default_c1() -> f64 {
    1e3
}
fn default_c2() -> f64 {
    1e4
}
fn default_flood_penalty() -> f64 {
    1e9
}
fn default_inflow_eps() -> f64 {
    1e-6
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            flow_threshold: default_flow(),
            load_threshold: default_load(),
            c1: default_c1(),
            c2: default_c2(),
            flood_penalty: default_flood_penalty(),
            inflow_epsilon: default_inflow_eps(),
        }
    }
}

impl MetricParams {
    fn validate(&self) -> Result<()> {
        let all = [self.flow_threshold, self.load_threshold, self.c1, self.c2, self.flood_penalty, self.inflow_epsilon];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(HydroError::Input("metric parameters must be positive".into()));
        }
        Ok(())
    }
}

fn excess(v: f64, threshold: f64) -> f64 {
    (v - threshold).max(0.0)
}

/// Final-storage, flooding and flow-exceedance penalty summed over all nodes.
pub fn metric_gamma(res: &SimResult, p: &MetricParams) -> f64 {
    let t = res.steps() as f64;
    let mut z = 0.0;
    for k in 0..res.node_ids.len() {
        z += p.c1 * res.final_depths[k];
        for (f, q) in res.flooding[k].iter().zip(&res.outflow[k]) {
            z += p.c2 / t * f + excess(*q, p.flow_threshold);
        }
    }
    z
}

/// Outfall load exceedance plus a fixed penalty per flooded node-step.
pub fn metric_epsilon(res: &SimResult, p: &MetricParams) -> f64 {
    let mut z = 0.0;
    for t in 0..res.steps() {
        z += excess(res.loading[t], p.load_threshold);
        z += res.flooding.iter().filter(|f| f[t] > 0.0).count() as f64 * p.flood_penalty;
    }
    z
}

/// `−exp(Σ (f + (q − λ)⁺) / i)` on the first node; `−1` when nothing accrues.
pub fn metric_theta(res: &SimResult, p: &MetricParams) -> f64 {
    let mut s = 0.0;
    for ((f, q), i) in res.flooding[0].iter().zip(&res.outflow[0]).zip(&res.inflow[0]) {
        if *i > p.inflow_epsilon {
            s += (f + excess(*q, p.flow_threshold)) / i;
        }
    }
    -s.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Gamma,
    Epsilon,
    Theta,
}

impl MetricKind {
    pub fn evaluate(self, res: &SimResult, p: &MetricParams) -> f64 {
        match self {
            MetricKind::Gamma => metric_gamma(res, p),
            MetricKind::Epsilon => metric_epsilon(res, p),
            MetricKind::Theta => metric_theta(res, p),
        }
    }

    /// Map a metric value to the quantity optimizers minimize. Theta is
    /// better when larger, so its negation is minimized.
    pub fn to_objective(self, metric: f64) -> f64 {
        match self {
            MetricKind::Theta => -metric,
            _ => metric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n: usize,
    /// Multiplicative range applied to every burst depth.
    pub spread: [f64; 2],
    pub seed: u64,
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub metric: MetricKind,
    /// s
    pub timestep: f64,
    /// Simulated duration, s.
    pub horizon: f64,
    #[serde(default)]
    pub metric_params: MetricParams,
    pub network: NetworkTopology,
    pub storm: Vec<Burst>,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
}

/// A loaded, validated scenario with its storms generated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub config: ScenarioConfig,
    storms: Vec<StormEvent>,
}

impl Scenario {
    pub fn from_config(id: &str, config: ScenarioConfig) -> Result<Self> {
        config.metric_params.validate()?;
        config.network.validate()?;
        if config.network.controlled.is_empty() {
            return Err(HydroError::Network("no controlled basins".into()));
        }
        if config.metric == MetricKind::Theta && config.network.nodes.len() != 1 {
            return Err(HydroError::Network("the theta metric needs a single-basin network".into()));
        }
        let storms = match &config.ensemble {
            Some(e) => generate_storm_ensemble(e.n, &config.storm, (e.spread[0], e.spread[1]), config.timestep, e.seed)?,
            None => vec![compose_bursts(0, &config.storm, 1.0, config.timestep)?],
        };
        let longest = storms.iter().map(|s| s.intensities.len()).max().unwrap_or(0) as f64 * config.timestep;
        if longest > config.horizon + 1e-9 {
            return Err(HydroError::Input(format!("horizon {} s is shorter than the storm ({longest} s)", config.horizon)));
        }
        Ok(Scenario { id: id.to_string(), config, storms })
    }

    pub fn parse(id: &str, text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| HydroError::Load { path: format!("<{id}>"), reason: e.to_string() })?;
        Self::from_config(id, config)
    }

    pub fn load_file(id: &str, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HydroError::Load { path: path.display().to_string(), reason: e.to_string() })?;
        let config: ScenarioConfig = toml::from_str(&text)
            .map_err(|e| HydroError::Load { path: path.display().to_string(), reason: e.to_string() })?;
        Self::from_config(id, config)
    }

    /// Same scenario with the storm ensemble regenerated at size `n`.
    pub fn with_ensemble_size(&self, n: usize) -> Result<Self> {
        let mut config = self.config.clone();
        match config.ensemble.as_mut() {
            Some(e) => e.n = n,
            None => return Err(HydroError::Input(format!("scenario `{}` has no storm ensemble", self.id))),
        }
        Self::from_config(&self.id, config)
    }

    pub fn metric_kind(&self) -> MetricKind {
        self.config.metric
    }

    pub fn dimension(&self) -> usize {
        self.config.network.controlled.len()
    }

    pub fn storms(&self) -> &[StormEvent] {
        &self.storms
    }

    /// The deepest storm (first on ties); the only one without an ensemble.
    pub fn largest_storm(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.storms.iter().enumerate() {
            if s.depth() > self.storms[best].depth() {
                best = i;
            }
        }
        best
    }

    fn storm(&self, id: usize) -> Result<&StormEvent> {
        self.storms.get(id).ok_or_else(|| HydroError::Input(format!("storm id {id} out of range 0..{}", self.storms.len())))
    }

    pub fn simulate(&self, x: &[f64], storm_id: usize) -> Result<SimResult> {
        simulate(&self.config.network, x, self.storm(storm_id)?, self.config.horizon)
    }

    /// The scenario metric in its own units and sign.
    pub fn metric(&self, x: &[f64], storm_id: usize) -> Result<f64> {
        Ok(self.config.metric.evaluate(&self.simulate(x, storm_id)?, &self.config.metric_params))
    }
}

/// Where scenarios load from: `$STORMBO_SCENARIO_DIR` if set, else the built-in copies.
pub fn scenario_dir() -> Option<PathBuf> {
    std::env::var_os(SCENARIO_DIR_ENV).map(PathBuf::from)
}

pub fn load_scenario(id: &str) -> Result<Scenario> {
    load_scenario_in(id, scenario_dir().as_deref())
}

/// Load `id` from `dir/<id>.toml`, or from the built-in copy when `dir` is `None`.
pub fn load_scenario_in(id: &str, dir: Option<&Path>) -> Result<Scenario> {
    if !SCENARIO_IDS.contains(&id) {
        return Err(HydroError::UnknownScenario(id.to_string()));
    }
    match dir {
        Some(d) => Scenario::load_file(id, &d.join(format!("{id}.toml"))),
        None => {
            let text = EMBEDDED.iter().find(|(k, _)| *k == id).map(|(_, t)| *t).expect("every id is embedded");
            Scenario::parse(id, text)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StormSelector {
    Fixed(usize),
    /// A fresh uniformly drawn storm per evaluation from a seeded stream.
    UniformRandom(u64),
}

/// A scenario as a minimization objective.
pub struct ScenarioObjective {
    scenario: Arc<Scenario>,
    selector: StormSelector,
    rng: ChaCha8Rng,
}

pub fn make_objective(scenario: Arc<Scenario>, selector: StormSelector) -> Result<ScenarioObjective> {
    let seed = match selector {
        StormSelector::Fixed(id) => {
            scenario.storm(id)?;
            0
        }
        StormSelector::UniformRandom(seed) => seed,
    };
    Ok(ScenarioObjective { scenario, selector, rng: ChaCha8Rng::seed_from_u64(seed) })
}

impl ScenarioObjective {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn next_storm(&mut self) -> usize {
        match self.selector {
            StormSelector::Fixed(id) => id,
            StormSelector::UniformRandom(_) => self.rng.random_range(0..self.scenario.storms.len()),
        }
    }
}

impl Objective for ScenarioObjective {
    fn dimension(&self) -> usize {
        self.scenario.dimension()
    }

    fn evaluate(&mut self, x: &[f64]) -> stormbo_core::Result<Evaluation> {
        let storm = self.next_storm();
        let metric = self.scenario.metric(x, storm).map_err(|e| stormbo_core::Error::Objective(e.to_string()))?;
        Ok(Evaluation { z: self.scenario.metric_kind().to_objective(metric), storm_id: Some(storm) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyRow {
    pub x: f64,
    pub mean: f64,
    /// Sample standard deviation over storms; 0 for a single storm.
    pub std: f64,
}

pub fn grid(resolution: usize) -> Vec<f64> {
    (0..resolution).map(|i| i as f64 / (resolution - 1) as f64).collect()
}

/// Metric mean and spread over `ensemble` at each point of a uniform grid on
/// the single control. Runs `resolution × ensemble.len()` simulations.
pub fn empirical_uncertainty(scenario: &Scenario, resolution: usize, ensemble: &[StormEvent]) -> Result<Vec<UncertaintyRow>> {
    if resolution < 2 {
        return Err(HydroError::Input("grid resolution must be at least 2".into()));
    }
    if scenario.dimension() != 1 {
        return Err(HydroError::Input("empirical uncertainty needs a single control".into()));
    }
    if ensemble.is_empty() {
        return Err(HydroError::Input("empty storm ensemble".into()));
    }
    let cfg = &scenario.config;
    grid(resolution)
        .into_par_iter()
        .map(|x| {
            let values = ensemble
                .iter()
                .map(|s| Ok(cfg.metric.evaluate(&simulate(&cfg.network, &[x], s, cfg.horizon)?, &cfg.metric_params)))
                .collect::<Result<Vec<f64>>>()?;
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = if values.len() < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            Ok(UncertaintyRow { x, mean, std })
        })
        .collect()
}
