//! Command-line harness: single runs, seed sweeps and the uncertainty study.
//!
//! Every command writes plain CSV for per-row data and JSON for summaries into
//! the `--out` directory. CSV output depends only on the flags, so reruns are
//! byte-identical; JSON summaries additionally carry wall-clock timings.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stormbo_core::mlhgp::{fit_mlhgp_from, MlhgpConfig};
use stormbo_core::optimizer::{bayes_optimize, run_method, seed_sweep, BoConfig, Method, SweepSummary};
use stormbo_core::{GpModel, MlhGpModel, Trace};
use stormbo_hydro::scenarios::{empirical_uncertainty, UncertaintyRow};
use stormbo_hydro::{load_scenario, make_objective, HydroError, MetricKind, Scenario, StormSelector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    /// Simulation, model or I/O failure after the inputs were accepted.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<HydroError> for CliError {
    fn from(e: HydroError) -> Self {
        match e {
            HydroError::UnknownScenario(_) | HydroError::Load { .. } | HydroError::Network(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "stormbo", version, about = "Bayesian-optimization control studies on stormwater networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize one scenario with one method and seed; writes trace.csv and summary.json.
    Run(RunArgs),
    /// Repeat methods over consecutive seeds; writes sweep.csv and sweep_summary.json.
    Sweep(SweepArgs),
    /// Compare MLH-GP and GP uncertainty against an ensemble oracle; writes uq.csv and uq_summary.json.
    Uq(UqArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario id (gamma, epsilon, theta) resolved against STORMBO_SCENARIO_DIR or the built-ins.
    #[arg(long)]
    pub scenario: String,
    /// bo, ga or random.
    #[arg(long)]
    pub method: String,
    /// Total objective evaluations.
    #[arg(long, default_value_t = 30)]
    pub budget: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: String,
    /// Comma-separated methods, e.g. `bo,ga,random`.
    #[arg(long, value_delimiter = ',', default_value = "bo,ga")]
    pub method: Vec<String>,
    /// Evaluations per run.
    #[arg(long, default_value_t = 30)]
    pub budget: usize,
    /// First seed of the sweep.
    #[arg(long)]
    pub seed: u64,
    /// Number of seeds: runs use `seed, seed+1, …, seed+seeds−1`.
    #[arg(long)]
    pub seeds: usize,
    /// Worker threads for concurrent seeds (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct UqArgs {
    /// A single-control scenario.
    #[arg(long, default_value = "theta")]
    pub scenario: String,
    /// BO evaluations under randomly drawn storms.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    #[arg(long, default_value_t = 101)]
    pub grid_resolution: usize,
    /// Ensemble size for both the BO storm draws and the oracle.
    #[arg(long, default_value_t = 20)]
    pub n_storms: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|r| format!("best z {} after {} evaluations", r.best_z, r.evaluations)),
        Command::Sweep(a) => cmd_sweep(a).map(|r| {
            r.methods.iter().map(|m| format!("{}: mu {} sigma {}", m.method, m.mu, m.sigma)).collect::<Vec<_>>().join("\n")
        }),
        Command::Uq(a) => cmd_uq(a).map(|r| {
            format!("std error: mlhgp {} gp {} (converged: {})", r.mlhgp_std_error, r.gp_std_error, r.mlhgp_converged)
        }),
    };
    match result {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_method(name: &str) -> CliResult<Method> {
    Method::from_name(name).ok_or_else(|| CliError::Usage(format!("unknown method '{name}' (expected bo, ga or random)")))
}

fn check_budget(budget: usize) -> CliResult<()> {
    if budget == 0 {
        return Err(CliError::Usage("--budget must be at least 1".into()));
    }
    Ok(())
}

/// Storm used by `run` and `sweep`: the deepest one in the scenario's ensemble.
fn design_storm(s: &Scenario) -> StormSelector {
    StormSelector::Fixed(s.largest_storm())
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

/// `iteration, x_0..x_{d−1}, z, storm_id`; the storm id is empty when unknown.
pub fn write_trace(path: &Path, trace: &Trace, dim: usize) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["iteration".to_string()];
    header.extend((0..dim).map(|k| format!("x_{k}")));
    header.extend(["z".to_string(), "storm_id".to_string()]);
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for r in trace.records() {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.decision.iter().map(f64::to_string));
        row.push(r.z.to_string());
        row.push(r.storm_id.map(|s| s.to_string()).unwrap_or_default());
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn metric_from_z(kind: MetricKind, z: f64) -> f64 {
    match kind {
        MetricKind::Theta => -z,
        _ => z,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub method: String,
    pub seed: u64,
    pub budget: usize,
    pub evaluations: usize,
    pub storm_id: usize,
    /// Evaluated decision with the lowest objective value.
    pub best_decision: Vec<f64>,
    /// Objective (minimized) at `best_decision`.
    pub best_z: f64,
    /// Scenario metric at `best_decision`; for theta this is `−best_z`, the maximum over records.
    pub best_metric: f64,
    pub best_iteration: usize,
    /// The method's own answer: for BO the minimizer of the final surrogate mean.
    pub recommended_decision: Vec<f64>,
    pub wall_time_s: f64,
    pub config: RunConfigEcho,
    /// Set when the run stopped early; the trace holds the completed evaluations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfigEcho {
    pub method: String,
    pub scenario: stormbo_hydro::scenarios::ScenarioConfig,
}

pub fn cmd_run(args: &RunArgs) -> CliResult<RunSummary> {
    check_budget(args.budget)?;
    let method = parse_method(&args.method)?;
    let scenario = Arc::new(load_scenario(&args.scenario)?);
    prepare_out(&args.out)?;
    let selector = design_storm(&scenario);
    let storm_id = match selector {
        StormSelector::Fixed(id) => id,
        StormSelector::UniformRandom(_) => unreachable!("run uses a fixed storm"),
    };
    let mut obj = make_objective(scenario.clone(), selector)?;
    let start = Instant::now();
    let outcome = run_method(&mut obj, &method, args.seed, args.budget);
    let wall_time_s = start.elapsed().as_secs_f64();

    let (trace, recommended, error) = match outcome {
        Ok(o) => (o.trace, o.best, None),
        Err(f) => (f.partial, Vec::new(), Some(f.error.to_string())),
    };
    let d = scenario.dimension();
    write_trace(&args.out.join("trace.csv"), &trace, d)?;

    let best = trace.best();
    let best_z = best.map_or(f64::NAN, |r| r.z);
    let summary = RunSummary {
        scenario: scenario.id.clone(),
        method: method.name().to_string(),
        seed: args.seed,
        budget: args.budget,
        evaluations: trace.len(),
        storm_id,
        best_decision: best.map(|r| r.decision.clone()).unwrap_or_default(),
        best_z,
        best_metric: metric_from_z(scenario.metric_kind(), best_z),
        best_iteration: best.map_or(0, |r| r.iteration),
        recommended_decision: recommended,
        wall_time_s,
        config: RunConfigEcho { method: format!("{method:?}"), scenario: scenario.config.clone() },
        error: error.clone(),
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    match error {
        Some(e) => Err(CliError::Runtime(format!("run stopped after {} evaluations: {e}", trace.len()))),
        None => Ok(summary),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodStats {
    pub method: String,
    pub mu: f64,
    pub sigma: f64,
    pub completed_seeds: usize,
    pub complete: bool,
    pub failures: Vec<SeedFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub scenario: String,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub storm_id: usize,
    /// One row per method: mean and sample standard deviation of each seed's best z.
    pub methods: Vec<MethodStats>,
    pub complete: bool,
    pub wall_time_s: f64,
}

fn thread_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<SweepReport> {
    check_budget(args.budget)?;
    if args.seeds < 2 {
        return Err(CliError::Usage("--seeds must be at least 2".into()));
    }
    let methods = args.method.iter().map(|m| parse_method(m.trim())).collect::<CliResult<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods given".into()));
    }
    let scenario = Arc::new(load_scenario(&args.scenario)?);
    let pool = thread_pool(args.jobs)?;
    prepare_out(&args.out)?;
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|k| args.seed.wrapping_add(k)).collect();
    let selector = design_storm(&scenario);

    let start = Instant::now();
    let summaries: Vec<SweepSummary> = methods
        .iter()
        .map(|m| {
            let factory = |_seed: u64| make_objective(scenario.clone(), selector).map_err(|e| stormbo_core::Error::Objective(e.to_string()));
            pool.install(|| seed_sweep(factory, m, &seeds, args.budget)).map_err(|e| CliError::Runtime(e.to_string()))
        })
        .collect::<CliResult<_>>()?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let path = args.out.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["method", "seed", "best_z"]).map_err(|e| io_err(&path, e))?;
    for s in &summaries {
        for r in &s.per_seed {
            let best = r.best.map(|b| b.to_string()).unwrap_or_default();
            w.write_record([s.method, &r.seed.to_string(), &best]).map_err(|e| io_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let stats: Vec<MethodStats> = summaries
        .iter()
        .map(|s| MethodStats {
            method: s.method.to_string(),
            mu: s.mean,
            sigma: s.std,
            completed_seeds: s.per_seed.iter().filter(|r| r.best.is_some()).count(),
            complete: s.complete,
            failures: s
                .per_seed
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| SeedFailure { seed: r.seed, error: e.clone() }))
                .collect(),
        })
        .collect();
    let report = SweepReport {
        scenario: scenario.id.clone(),
        budget: args.budget,
        seeds,
        storm_id: scenario.largest_storm(),
        complete: stats.iter().all(|s| s.complete),
        methods: stats,
        wall_time_s,
    };
    write_json(&args.out.join("sweep_summary.json"), &report)?;
    if !report.complete {
        eprintln!("warning: some seeds failed; see sweep_summary.json");
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UqRow {
    pub x_grid: f64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub mlhgp_mean: f64,
    pub mlhgp_std: f64,
    pub gp_mean: f64,
    pub gp_std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UqReport {
    pub scenario: String,
    pub seed: u64,
    pub budget: usize,
    pub grid_resolution: usize,
    pub n_storms: usize,
    pub bo_samples: usize,
    pub oracle_simulations: usize,
    /// Mean over the grid of |model std − empirical std|.
    pub mlhgp_std_error: f64,
    pub gp_std_error: f64,
    pub mlhgp_mean_error: f64,
    pub gp_mean_error: f64,
    pub empirical_std_range: f64,
    pub mlhgp_converged: bool,
    pub mlhgp_iterations: usize,
    pub mlhgp_final_change: f64,
    pub gp_noise_variance: f64,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub rows: Vec<UqRow>,
}

/// Model mean and observation-level std, converted from objective to metric units.
fn model_columns(kind: MetricKind, mean_var: (f64, f64)) -> (f64, f64) {
    (metric_from_z(kind, mean_var.0), mean_var.1.max(0.0).sqrt())
}

/// Grid rows comparing both surrogates with the empirical oracle.
pub fn uq_rows(kind: MetricKind, oracle: &[UncertaintyRow], gp: &GpModel, mlhgp: &MlhGpModel) -> CliResult<Vec<UqRow>> {
    let rt = |e: stormbo_core::Error| CliError::Runtime(e.to_string());
    oracle
        .iter()
        .map(|o| {
            let (gm, gs) = model_columns(kind, gp.predictive(&[o.x]).map_err(rt)?);
            let (mm, ms) = model_columns(kind, mlhgp.posterior(&[o.x]).map_err(rt)?);
            Ok(UqRow {
                x_grid: o.x,
                empirical_mean: o.mean,
                empirical_std: o.std,
                mlhgp_mean: mm,
                mlhgp_std: ms,
                gp_mean: gm,
                gp_std: gs,
            })
        })
        .collect()
}

fn mean_abs(rows: &[UqRow], f: impl Fn(&UqRow) -> f64) -> f64 {
    rows.iter().map(f).map(f64::abs).sum::<f64>() / rows.len() as f64
}

pub fn cmd_uq(args: &UqArgs) -> CliResult<UqReport> {
    check_budget(args.budget)?;
    if args.grid_resolution < 2 {
        return Err(CliError::Usage("--grid-resolution must be at least 2".into()));
    }
    if args.n_storms == 0 {
        return Err(CliError::Usage("--n-storms must be at least 1".into()));
    }
    let base = load_scenario(&args.scenario)?;
    if base.dimension() != 1 {
        return Err(CliError::Usage(format!("uq needs a single-control scenario; '{}' has {}", base.id, base.dimension())));
    }
    let scenario = Arc::new(base.with_ensemble_size(args.n_storms)?);
    let kind = scenario.metric_kind();
    let pool = thread_pool(args.jobs)?;
    prepare_out(&args.out)?;
    let start = Instant::now();

    let mut obj = make_objective(scenario.clone(), StormSelector::UniformRandom(args.seed))?;
    let cfg = BoConfig { n_total: args.budget, rng_seed: args.seed, ..Default::default() };
    let bo = match bayes_optimize(&mut obj, &cfg) {
        Ok(o) => o,
        Err(f) => {
            write_trace(&args.out.join("trace.csv"), &f.partial, 1)?;
            return Err(CliError::Runtime(format!("BO stopped after {} evaluations: {}", f.partial.len(), f.error)));
        }
    };
    write_trace(&args.out.join("trace.csv"), &bo.trace, 1)?;

    let mcfg = MlhgpConfig { seed: args.seed, ..Default::default() };
    let mlhgp = fit_mlhgp_from(&bo.model, &mcfg).map_err(|e| CliError::Runtime(format!("MLH-GP fit: {e}")))?;
    let oracle = pool.install(|| empirical_uncertainty(&scenario, args.grid_resolution, scenario.storms()))?;
    let rows = uq_rows(kind, &oracle, &bo.model, &mlhgp)?;

    let path = args.out.join("uq.csv");
    let mut w = csv_writer(&path)?;
    for r in &rows {
        w.serialize(r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.empirical_std), b.max(r.empirical_std)));
    let report = UqReport {
        scenario: scenario.id.clone(),
        seed: args.seed,
        budget: args.budget,
        grid_resolution: args.grid_resolution,
        n_storms: args.n_storms,
        bo_samples: bo.trace.len(),
        oracle_simulations: args.grid_resolution * args.n_storms,
        mlhgp_std_error: mean_abs(&rows, |r| r.mlhgp_std - r.empirical_std),
        gp_std_error: mean_abs(&rows, |r| r.gp_std - r.empirical_std),
        mlhgp_mean_error: mean_abs(&rows, |r| r.mlhgp_mean - r.empirical_mean),
        gp_mean_error: mean_abs(&rows, |r| r.gp_mean - r.empirical_mean),
        empirical_std_range: hi - lo,
        mlhgp_converged: mlhgp.converged(),
        mlhgp_iterations: mlhgp.iterations_used(),
        mlhgp_final_change: mlhgp.final_change(),
        gp_noise_variance: bo.model.hyperparams().noise_variance,
        wall_time_s: start.elapsed().as_secs_f64(),
        rows,
    };
    write_json(&args.out.join("uq_summary.json"), &report)?;
    Ok(report)
}
