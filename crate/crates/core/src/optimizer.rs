//! Black-box minimization of control decisions: Bayesian optimization,
//! a real-coded genetic algorithm, uniform random search, and the
//! multi-seed comparison protocol.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::acquisition::{self, AcquisitionConfig};
use crate::error::{Error, Result};
use crate::gp::{self, default_init, Dataset, FitOptions, GpModel, Hyperparams};

/// Result of one objective call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub z: f64,
    pub storm_id: Option<usize>,
}

impl From<f64> for Evaluation {
    fn from(z: f64) -> Self {
        Evaluation { z, storm_id: None }
    }
}

/// A performance metric over `[0,1]^d` to be minimized.
pub trait Objective {
    fn dimension(&self) -> usize;
    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation>;
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
        (**self).evaluate(x)
    }
}

/// Adapts a plain function into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
        let z = (self.f)(x);
        if z.is_finite() {
            Ok(z.into())
        } else {
            Err(Error::Objective(format!("non-finite value at {x:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub iteration: usize,
    pub decision: Vec<f64>,
    pub z: f64,
    pub storm_id: Option<usize>,
}

/// Every objective call of a run, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    records: Vec<EvaluationRecord>,
    best_so_far: Vec<f64>,
}

impl Trace {
    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    /// Running minimum of `z` after each call.
    pub fn best_so_far(&self) -> &[f64] {
        &self.best_so_far
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First record attaining the minimum `z`.
    pub fn best(&self) -> Option<&EvaluationRecord> {
        self.records.iter().fold(None, |acc: Option<&EvaluationRecord>, r| match acc {
            Some(b) if b.z <= r.z => Some(b),
            _ => Some(r),
        })
    }

    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::new(
            self.records.iter().map(|r| r.decision.clone()).collect(),
            self.records.iter().map(|r| r.z).collect(),
        )?
        .with_storm_ids(self.records.iter().map(|r| r.storm_id).collect())
    }

    fn push(&mut self, decision: Vec<f64>, eval: Evaluation) {
        let best = self.best_so_far.last().map_or(eval.z, |b| b.min(eval.z));
        self.records.push(EvaluationRecord { iteration: self.records.len(), decision, z: eval.z, storm_id: eval.storm_id });
        self.best_so_far.push(best);
    }
}

/// A failed run together with everything evaluated before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trace,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} evaluations)", self.error, self.partial.len())
    }
}

impl std::error::Error for RunFailure {}

fn evaluate_into<O: Objective + ?Sized>(obj: &mut O, x: Vec<f64>, trace: &mut Trace) -> std::result::Result<f64, RunFailure> {
    match obj.evaluate(&x) {
        Ok(e) => {
            let z = e.z;
            trace.push(x, e);
            Ok(z)
        }
        Err(error) => Err(RunFailure { error, partial: std::mem::take(trace) }),
    }
}

fn uniform_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialDesign {
    #[default]
    Uniform,
    LatinHypercube,
}

fn initial_design<R: Rng>(rng: &mut R, kind: InitialDesign, n: usize, d: usize) -> Vec<Vec<f64>> {
    match kind {
        InitialDesign::Uniform => (0..n).map(|_| uniform_point(rng, d)).collect(),
        InitialDesign::LatinHypercube => {
            let mut pts = vec![vec![0.0; d]; n];
            for k in 0..d {
                let mut strata: Vec<usize> = (0..n).collect();
                strata.shuffle(rng);
                for (p, s) in pts.iter_mut().zip(strata) {
                    p[k] = (s as f64 + rng.random::<f64>()) / n as f64;
                }
            }
            pts
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoConfig {
    /// Initial random evaluations; `None` means `max(5, 2·d)`.
    pub n_initial: Option<usize>,
    /// Total objective evaluations, initial design included.
    pub n_total: usize,
    pub acquisition: AcquisitionConfig,
    pub rng_seed: u64,
    pub gp_restarts: usize,
    pub initial_design: InitialDesign,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            n_initial: None,
            n_total: 30,
            acquisition: AcquisitionConfig::default(),
            rng_seed: 0,
            gp_restarts: gp::DEFAULT_RESTARTS,
            initial_design: InitialDesign::Uniform,
        }
    }
}

impl BoConfig {
    pub fn initial_count(&self, d: usize) -> usize {
        self.n_initial.unwrap_or_else(|| 5.max(2 * d)).min(self.n_total)
    }
}

#[derive(Debug, Clone)]
pub struct BoOutcome {
    /// Minimizer of the final surrogate mean.
    pub best: Vec<f64>,
    pub trace: Trace,
    pub model: GpModel,
}

/// Grid points per dimension used to minimize the final surrogate when `d ≤ 2`.
pub const FINAL_GRID: usize = 201;

/// Bayesian optimization with expected improvement.
pub fn bayes_optimize<O: Objective + ?Sized>(obj: &mut O, cfg: &BoConfig) -> std::result::Result<BoOutcome, RunFailure> {
    bayes_optimize_observed(obj, cfg, |_, _| {})
}

/// As [`bayes_optimize`], calling `observe(n, model)` after every surrogate fit
/// on `n` evaluations (including the final fit on all of them).
pub fn bayes_optimize_observed<O, F>(obj: &mut O, cfg: &BoConfig, mut observe: F) -> std::result::Result<BoOutcome, RunFailure>
where
    O: Objective + ?Sized,
    F: FnMut(usize, &GpModel),
{
    let d = obj.dimension();
    if cfg.n_total == 0 || cfg.n_initial == Some(0) || cfg.n_initial.is_some_and(|n| n > cfg.n_total) {
        return Err(RunFailure {
            error: Error::Input(format!("need 1 <= n_initial <= n_total, got {:?}/{}", cfg.n_initial, cfg.n_total)),
            partial: Trace::default(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut trace = Trace::default();
    for x in initial_design(&mut rng, cfg.initial_design, cfg.initial_count(d), d) {
        evaluate_into(obj, x, &mut trace)?;
    }

    let model_err = |error: Error, trace: &mut Trace| RunFailure { error, partial: std::mem::take(trace) };
    let mut last: Option<Hyperparams> = None;
    while trace.len() < cfg.n_total {
        let data = trace.dataset().map_err(|e| model_err(e, &mut trace))?;
        let init = last.unwrap_or_else(|| default_init(&data));
        let opts = FitOptions { restarts: cfg.gp_restarts, seed: rng.next_u64(), standardize: true };
        let model = gp::fit_with(&data, &init, opts).map_err(|e| model_err(e, &mut trace))?;
        observe(trace.len(), &model);
        let inc = acquisition::incumbent(&model).map_err(|e| model_err(e, &mut trace))?;
        let (x, _) = acquisition::maximize(&model, &cfg.acquisition, inc, rng.next_u64())
            .map_err(|e| model_err(e, &mut trace))?;
        last = Some(*model.hyperparams());
        evaluate_into(obj, x, &mut trace)?;
    }

    let data = trace.dataset().map_err(|e| model_err(e, &mut trace))?;
    let init = last.unwrap_or_else(|| default_init(&data));
    let opts = FitOptions { restarts: cfg.gp_restarts, seed: rng.next_u64(), standardize: true };
    let model = gp::fit_with(&data, &init, opts).map_err(|e| model_err(e, &mut trace))?;
    observe(trace.len(), &model);
    let best = surrogate_minimizer(&model).map_err(|e| model_err(e, &mut trace))?;
    Ok(BoOutcome { best, trace, model })
}

/// Minimizer of the posterior mean: over a dense grid for `d ≤ 2`, otherwise
/// over the evaluated decisions.
pub fn surrogate_minimizer(model: &GpModel) -> Result<Vec<f64>> {
    let d = model.dim();
    let candidates: Vec<Vec<f64>> = if d <= 2 {
        let axis: Vec<f64> = (0..FINAL_GRID).map(|i| i as f64 / (FINAL_GRID - 1) as f64).collect();
        if d == 1 {
            axis.iter().map(|&a| vec![a]).collect()
        } else {
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect()
        }
    } else {
        model.data().inputs().to_vec()
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x in candidates {
        let (mu, _) = model.posterior(&x)?;
        if best.as_ref().is_none_or(|(b, _)| mu < *b) {
            best = Some((mu, x));
        }
    }
    Ok(best.expect("non-empty candidate set").1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub pop: usize,
    pub generations: usize,
    pub eval_budget: usize,
    pub rng_seed: u64,
    pub tournament_size: usize,
    pub blend_alpha: f64,
    /// Probability that a consecutive pair of offspring is crossed.
    pub crossover_prob: f64,
    pub mutation_sigma: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Overrides the uniform random initial population.
    pub initial_population: Option<Vec<Vec<f64>>>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop: 10,
            generations: 1000,
            eval_budget: 30,
            rng_seed: 0,
            tournament_size: 3,
            blend_alpha: 0.5,
            crossover_prob: 0.5,
            mutation_sigma: 0.1,
            mutation_prob: 0.2,
            initial_population: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Vec<f64>,
    pub trace: Trace,
}

fn tournament<R: Rng>(rng: &mut R, fitness: &[f64], size: usize) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

/// Real-coded GA minimizing the objective. Stops issuing calls at the budget.
pub fn ga_optimize<O: Objective + ?Sized>(obj: &mut O, cfg: &GaConfig) -> std::result::Result<RunOutcome, RunFailure> {
    let d = obj.dimension();
    if cfg.pop < 2 {
        return Err(RunFailure { error: Error::Input("population must be at least 2".into()), partial: Trace::default() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut trace = Trace::default();
    let mutation = Normal::new(0.0, cfg.mutation_sigma.max(0.0)).map_err(|e| RunFailure {
        error: Error::Input(e.to_string()),
        partial: Trace::default(),
    })?;

    let population: Vec<Vec<f64>> = match &cfg.initial_population {
        Some(p) => p.iter().take(cfg.pop).cloned().collect(),
        None => (0..cfg.pop).map(|_| uniform_point(&mut rng, d)).collect(),
    };
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(population.len());
    let mut fitness = Vec::with_capacity(population.len());
    for x in population {
        if trace.len() >= cfg.eval_budget {
            break;
        }
        fitness.push(evaluate_into(obj, x.clone(), &mut trace)?);
        pop.push(x);
    }

    if pop.len() == cfg.pop.min(cfg.initial_population.as_ref().map_or(cfg.pop, Vec::len)) && !pop.is_empty() {
        'generations: for _ in 0..cfg.generations {
            if trace.len() >= cfg.eval_budget {
                break;
            }
            let n = pop.len();
            let mut offspring: Vec<(Vec<f64>, Option<f64>)> = (0..n)
                .map(|_| {
                    let i = tournament(&mut rng, &fitness, cfg.tournament_size);
                    (pop[i].clone(), Some(fitness[i]))
                })
                .collect();

            for pair in offspring.chunks_mut(2) {
                if pair.len() < 2 || rng.random::<f64>() >= cfg.crossover_prob {
                    continue;
                }
                let (a, b) = pair.split_at_mut(1);
                let (x1, x2) = (&mut a[0].0, &mut b[0].0);
                let mut changed = false;
                for k in 0..d {
                    let gamma = (1.0 + 2.0 * cfg.blend_alpha) * rng.random::<f64>() - cfg.blend_alpha;
                    let (p1, p2) = (x1[k], x2[k]);
                    if p1 == p2 {
                        continue;
                    }
                    let c1 = ((1.0 - gamma) * p1 + gamma * p2).clamp(0.0, 1.0);
                    let c2 = (gamma * p1 + (1.0 - gamma) * p2).clamp(0.0, 1.0);
                    changed |= c1 != p1 || c2 != p2;
                    x1[k] = c1;
                    x2[k] = c2;
                }
                if changed {
                    a[0].1 = None;
                    b[0].1 = None;
                }
            }

            for (x, fit) in offspring.iter_mut() {
                for g in x.iter_mut() {
                    if rng.random::<f64>() < cfg.mutation_prob {
                        let v = (*g + mutation.sample(&mut rng)).clamp(0.0, 1.0);
                        if v != *g {
                            *g = v;
                            *fit = None;
                        }
                    }
                }
            }

            let mut next_pop = Vec::with_capacity(n);
            let mut next_fit = Vec::with_capacity(n);
            for (x, fit) in offspring {
                let f = match fit {
                    Some(f) => f,
                    None => {
                        if trace.len() >= cfg.eval_budget {
                            break 'generations;
                        }
                        evaluate_into(obj, x.clone(), &mut trace)?
                    }
                };
                next_pop.push(x);
                next_fit.push(f);
            }
            pop = next_pop;
            fitness = next_fit;
        }
    }

    let best = trace.best().map(|r| r.decision.clone()).unwrap_or_default();
    Ok(RunOutcome { best, trace })
}

/// `n` uniform draws; returns the best.
pub fn random_search<O: Objective + ?Sized>(obj: &mut O, n: usize, seed: u64) -> std::result::Result<RunOutcome, RunFailure> {
    let d = obj.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::default();
    for _ in 0..n {
        let x = uniform_point(&mut rng, d);
        evaluate_into(obj, x, &mut trace)?;
    }
    let best = trace.best().map(|r| r.decision.clone()).unwrap_or_default();
    Ok(RunOutcome { best, trace })
}

/// Which optimizer a sweep runs, with the per-method settings that are not
/// overridden by the sweep (seed and budget).
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Bo(BoConfig),
    Ga(GaConfig),
    Random,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Bo(_) => "bo",
            Method::Ga(_) => "ga",
            Method::Random => "random",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        match name {
            "bo" => Some(Method::Bo(BoConfig::default())),
            "ga" => Some(Method::Ga(GaConfig::default())),
            "random" => Some(Method::Random),
            _ => None,
        }
    }
}

/// Run one method on one objective with the given seed and evaluation budget.
pub fn run_method<O: Objective + ?Sized>(
    obj: &mut O,
    method: &Method,
    seed: u64,
    budget: usize,
) -> std::result::Result<RunOutcome, RunFailure> {
    match method {
        Method::Bo(base) => {
            let cfg = BoConfig { rng_seed: seed, n_total: budget, ..*base };
            bayes_optimize(obj, &cfg).map(|o| RunOutcome { best: o.best, trace: o.trace })
        }
        Method::Ga(base) => {
            let cfg = GaConfig { rng_seed: seed, eval_budget: budget, ..base.clone() };
            ga_optimize(obj, &cfg)
        }
        Method::Random => random_search(obj, budget, seed),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    /// Minimum metric observed in the run.
    pub best: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub method: &'static str,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub per_seed: Vec<SeedResult>,
    /// False when any run failed; failed runs are excluded from the statistics.
    pub complete: bool,
}

pub fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run `method` once per seed with identical budgets, seeds in parallel.
pub fn seed_sweep<F, O>(factory: F, method: &Method, seeds: &[u64], budget: usize) -> Result<SweepSummary>
where
    F: Fn(u64) -> Result<O> + Sync,
    O: Objective,
{
    if seeds.len() < 2 {
        return Err(Error::Input("a sweep needs at least two seeds".into()));
    }
    let per_seed: Vec<SeedResult> = seeds
        .par_iter()
        .map(|&seed| {
            let outcome = factory(seed)
                .map_err(|e| e.to_string())
                .and_then(|mut obj| run_method(&mut obj, method, seed, budget).map_err(|f| f.to_string()));
            match outcome {
                Ok(o) => SeedResult { seed, best: o.trace.best_so_far().last().copied(), error: None },
                Err(e) => SeedResult { seed, best: None, error: Some(e) },
            }
        })
        .collect();
    let bests: Vec<f64> = per_seed.iter().filter_map(|r| r.best).collect();
    let (mean, std) = mean_and_sample_std(&bests);
    let complete = bests.len() == per_seed.len();
    Ok(SweepSummary { method: method.name(), mean, std, per_seed, complete })
}
