//! Level-pool routing of runoff through a tree of valve-controlled basins.
//!
//! Each basin is a reservoir whose outflow follows the orifice law
//! `q = Cd · (x · outlet_area) · √(2 g d)`. Basins are stepped by explicit
//! Euler in upstream-to-downstream order, so an outflow reaches a zero-delay
//! downstream basin within the same step. Water above `max_depth` leaves as
//! flooding. A completely mixed tank with first-order settling carries the
//! pollutant load.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{HydroError, Result};
use crate::storm::{steps, StormEvent};

pub const GRAVITY: f64 = 9.81;
/// Finest substep is `Δt / MAX_SUBSTEPS`.
pub const MAX_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Basin {
    pub id: String,
    /// m²
    pub surface_area: f64,
    /// m
    pub max_depth: f64,
    /// m², fully open
    pub outlet_area: f64,
    pub discharge_coeff: f64,
    /// Directly connected subcatchment, m².
    #[serde(default)]
    pub catchment_area: f64,
    #[serde(default = "one")]
    pub runoff_coeff: f64,
    /// m
    #[serde(default)]
    pub initial_depth: f64,
    /// kg/m³
    #[serde(default)]
    pub initial_pollutant_conc: f64,
    /// 1/s
    #[serde(default)]
    pub settling_rate: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: String,
    pub to: String,
    /// Pure travel delay, s; rounded to whole steps.
    #[serde(default)]
    pub delay: f64,
}

/// Dry-weather inflow `mean + amplitude · sin(2π t / period + phase)` at every basin, m³/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseflow {
    pub mean: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "day")]
    pub period: f64,
    #[serde(default)]
    pub phase: f64,
    /// kg/m³
    #[serde(default)]
    pub conc: f64,
}

fn day() -> f64 {
    86_400.0
}

impl Baseflow {
    pub fn at(&self, t: f64) -> f64 {
        (self.mean + self.amplitude * (2.0 * std::f64::consts::PI * t / self.period + self.phase).sin()).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkTopology {
    pub nodes: Vec<Basin>,
    pub edges: Vec<Edge>,
    /// Basins driven by the control vector, in decision order.
    pub controlled: Vec<String>,
    /// Sink id; not a basin.
    pub outfall: String,
    /// Pollutant concentration of storm runoff, kg/m³.
    #[serde(default)]
    pub runoff_conc: f64,
    #[serde(default)]
    pub baseflow: Option<Baseflow>,
}

/// Validated, index-based form of a topology.
#[derive(Debug, Clone)]
struct Plan {
    order: Vec<usize>,
    /// `None` drains to the outfall.
    downstream: Vec<Option<usize>>,
    delay_steps: Vec<usize>,
    control_slot: Vec<Option<usize>>,
}

impl NetworkTopology {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Check the structural and physical invariants.
    pub fn validate(&self) -> Result<()> {
        self.plan(1.0).map(|_| ())
    }

    fn plan(&self, dt: f64) -> Result<Plan> {
        let err = |m: String| Err(HydroError::Network(m));
        let n = self.nodes.len();
        if n == 0 {
            return err("no basins".into());
        }
        let mut index = HashMap::new();
        for (i, b) in self.nodes.iter().enumerate() {
            if b.id == self.outfall {
                return err(format!("basin `{}` reuses the outfall id", b.id));
            }
            if index.insert(b.id.as_str(), i).is_some() {
                return err(format!("duplicate basin id `{}`", b.id));
            }
            let positive = [b.surface_area, b.max_depth, b.outlet_area, b.discharge_coeff];
            if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return err(format!("basin `{}`: area, depth, outlet and Cd must be positive", b.id));
            }
            let nonneg = [b.catchment_area, b.runoff_coeff, b.initial_depth, b.initial_pollutant_conc, b.settling_rate];
            if nonneg.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return err(format!("basin `{}`: catchment, coefficients and initial state must be non-negative", b.id));
            }
            if b.initial_depth > b.max_depth {
                return err(format!("basin `{}`: initial depth above max depth", b.id));
            }
        }
        if !(self.runoff_conc >= 0.0) {
            return err("runoff concentration must be non-negative".into());
        }
        if let Some(bf) = &self.baseflow {
            if !(bf.mean.is_finite() && bf.amplitude.is_finite() && bf.period > 0.0 && bf.conc >= 0.0) {
                return err("invalid baseflow parameters".into());
            }
        }

        let mut downstream = vec![None; n];
        let mut delay_steps = vec![0; n];
        let mut has_edge = vec![false; n];
        for e in &self.edges {
            let Some(&u) = index.get(e.from.as_str()) else {
                return err(format!("edge from unknown basin `{}`", e.from));
            };
            if has_edge[u] {
                return err(format!("basin `{}` has more than one outgoing link", e.from));
            }
            has_edge[u] = true;
            downstream[u] = if e.to == self.outfall {
                None
            } else {
                match index.get(e.to.as_str()) {
                    Some(&v) => Some(v),
                    None => return err(format!("edge to unknown node `{}`", e.to)),
                }
            };
            if !(e.delay >= 0.0 && e.delay.is_finite()) {
                return err(format!("negative delay on link {} -> {}", e.from, e.to));
            }
            delay_steps[u] = (e.delay / dt).round() as usize;
        }
        if let Some(i) = has_edge.iter().position(|h| !h) {
            return err(format!("basin `{}` has no outgoing link", self.nodes[i].id));
        }

        // Kahn's algorithm; lowest index first for a stable order.
        let mut indegree = vec![0usize; n];
        for d in downstream.iter().flatten() {
            indegree[*d] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            if let Some(d) = downstream[i] {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    ready.insert(d);
                }
            }
        }
        if order.len() != n {
            return err("links contain a cycle".into());
        }

        let mut control_slot = vec![None; n];
        for (k, id) in self.controlled.iter().enumerate() {
            match index.get(id.as_str()) {
                Some(&i) if control_slot[i].is_none() => control_slot[i] = Some(k),
                Some(_) => return err(format!("basin `{id}` controlled twice")),
                None => return err(format!("controlled id `{id}` is not a basin")),
            }
        }
        Ok(Plan { order, downstream, delay_steps, control_slot })
    }
}

/// Volumes (m³) for the network-wide balance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VolumeBudget {
    pub initial_storage: f64,
    /// Runoff plus dry-weather inflow.
    pub external_inflow: f64,
    pub final_storage: f64,
    pub outfall: f64,
    pub flooded: f64,
    /// Water still travelling along delayed links at the end.
    pub in_transit: f64,
}

impl VolumeBudget {
    /// `|in − out − Δstorage|` relative to the water that entered or was stored.
    pub fn relative_error(&self) -> f64 {
        let lhs = self.initial_storage + self.external_inflow;
        let rhs = self.final_storage + self.outfall + self.flooded + self.in_transit;
        (lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE)
    }
}

/// Per-node series are step averages, except `depth`, which is the depth at the end of each step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub timestep: f64,
    pub node_ids: Vec<String>,
    /// `[node][step]`, m
    pub depth: Vec<Vec<f64>>,
    /// `[node][step]`, m³/s
    pub outflow: Vec<Vec<f64>>,
    /// `[node][step]`, m³/s
    pub flooding: Vec<Vec<f64>>,
    /// `[node][step]`, total inflow including upstream, m³/s
    pub inflow: Vec<Vec<f64>>,
    /// Flow reaching the outfall, m³/s
    pub outfall_flow: Vec<f64>,
    /// Pollutant load reaching the outfall, kg/s
    pub loading: Vec<f64>,
    pub final_depths: Vec<f64>,
    pub volumes: VolumeBudget,
    /// Largest substep count any step needed.
    pub max_substeps: usize,
}

impl SimResult {
    pub fn steps(&self) -> usize {
        self.outfall_flow.len()
    }
}

#[derive(Clone)]
struct State {
    storage: Vec<f64>,
    mass: Vec<f64>,
}

struct StepOut {
    q: Vec<f64>,
    f: Vec<f64>,
    i: Vec<f64>,
    /// Pollutant flux leaving each node, kg/s.
    load: Vec<f64>,
}

/// Run the network for `duration` seconds at the storm's timestep.
pub fn simulate(net: &NetworkTopology, controls: &[f64], storm: &StormEvent, duration: f64) -> Result<SimResult> {
    let dt = storm.timestep;
    let plan = net.plan(dt)?;
    if controls.len() != net.controlled.len() {
        return Err(HydroError::Input(format!("expected {} controls, got {}", net.controlled.len(), controls.len())));
    }
    if controls.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(HydroError::Input(format!("controls must lie in [0, 1]: {controls:?}")));
    }
    let n_steps = steps(duration, dt, "duration")?;
    let n = net.nodes.len();
    let opening: Vec<f64> = (0..n).map(|i| plan.control_slot[i].map_or(1.0, |k| controls[k])).collect();

    let mut state = State {
        storage: net.nodes.iter().map(|b| b.initial_depth * b.surface_area).collect(),
        mass: net.nodes.iter().map(|b| b.initial_depth * b.surface_area * b.initial_pollutant_conc).collect(),
    };
    let initial_storage: f64 = state.storage.iter().sum();
    let mut pending: Vec<VecDeque<(f64, f64)>> =
        plan.delay_steps.iter().map(|&k| std::iter::repeat_n((0.0, 0.0), k).collect()).collect();

    let mut res = SimResult {
        timestep: dt,
        node_ids: net.nodes.iter().map(|b| b.id.clone()).collect(),
        depth: vec![Vec::with_capacity(n_steps); n],
        outflow: vec![Vec::with_capacity(n_steps); n],
        flooding: vec![Vec::with_capacity(n_steps); n],
        inflow: vec![Vec::with_capacity(n_steps); n],
        outfall_flow: Vec::with_capacity(n_steps),
        loading: Vec::with_capacity(n_steps),
        final_depths: Vec::new(),
        volumes: VolumeBudget { initial_storage, ..Default::default() },
        max_substeps: 1,
    };

    let mut ext = vec![0.0; n];
    let mut ext_load = vec![0.0; n];
    for t in 0..n_steps {
        let rain = storm.intensity(t);
        let base = net.baseflow.as_ref().map_or(0.0, |b| b.at((t as f64 + 0.5) * dt));
        let base_conc = net.baseflow.as_ref().map_or(0.0, |b| b.conc);
        for (k, b) in net.nodes.iter().enumerate() {
            let runoff = rain * b.catchment_area * b.runoff_coeff;
            ext[k] = runoff + base;
            ext_load[k] = runoff * net.runoff_conc + base * base_conc;
        }
        let mut arrivals = vec![(0.0, 0.0); n];
        let mut outfall = (0.0, 0.0);
        for u in 0..n {
            if plan.delay_steps[u] > 0 {
                let a = pending[u].pop_front().expect("delay buffer holds delay_steps entries");
                match plan.downstream[u] {
                    Some(d) => {
                        arrivals[d].0 += a.0;
                        arrivals[d].1 += a.1;
                    }
                    None => {
                        outfall.0 += a.0;
                        outfall.1 += a.1;
                    }
                }
            }
        }

        let mut substeps = 1;
        let out = loop {
            let mut trial = state.clone();
            match advance(net, &plan, &opening, &mut trial, &ext, &ext_load, &arrivals, dt, substeps) {
                Ok(o) => {
                    state = trial;
                    break o;
                }
                Err(_) if substeps < MAX_SUBSTEPS => substeps *= 2,
                Err(node) => {
                    return Err(HydroError::Unstable { step: t, node: net.nodes[node].id.clone(), substeps });
                }
            }
        };
        res.max_substeps = res.max_substeps.max(substeps);

        for u in 0..n {
            if plan.delay_steps[u] > 0 {
                pending[u].push_back((out.q[u], out.load[u]));
            } else if plan.downstream[u].is_none() {
                outfall.0 += out.q[u];
                outfall.1 += out.load[u];
            }
            res.depth[u].push(state.storage[u] / net.nodes[u].surface_area);
            res.outflow[u].push(out.q[u]);
            res.flooding[u].push(out.f[u]);
            res.inflow[u].push(out.i[u]);
            res.volumes.flooded += out.f[u] * dt;
        }
        res.volumes.external_inflow += ext.iter().sum::<f64>() * dt;
        res.volumes.outfall += outfall.0 * dt;
        res.outfall_flow.push(outfall.0);
        res.loading.push(outfall.1);
    }

    res.final_depths = state.storage.iter().zip(&net.nodes).map(|(s, b)| s / b.surface_area).collect();
    res.volumes.final_storage = state.storage.iter().sum();
    res.volumes.in_transit = pending.iter().flat_map(|p| p.iter().map(|(v, _)| v * dt)).sum();
    Ok(res)
}

/// One step of `substeps` Euler substeps. Returns step-averaged rates, or
/// the index of a node whose tentative depth change exceeded its max depth.
#[allow(clippy::too_many_arguments)]
fn advance(
    net: &NetworkTopology,
    plan: &Plan,
    opening: &[f64],
    state: &mut State,
    ext: &[f64],
    ext_load: &[f64],
    arrivals: &[(f64, f64)],
    dt: f64,
    substeps: usize,
) -> std::result::Result<StepOut, usize> {
    let n = net.nodes.len();
    let h = dt / substeps as f64;
    let w = 1.0 / substeps as f64;
    let mut out = StepOut { q: vec![0.0; n], f: vec![0.0; n], i: vec![0.0; n], load: vec![0.0; n] };
    let mut inflow = vec![0.0; n];
    let mut inload = vec![0.0; n];
    for _ in 0..substeps {
        for k in 0..n {
            inflow[k] = ext[k] + arrivals[k].0;
            inload[k] = ext_load[k] + arrivals[k].1;
        }
        for &k in &plan.order {
            let b = &net.nodes[k];
            let i = inflow[k];
            let s = state.storage[k];
            let d = s / b.surface_area;
            let q_orifice = b.discharge_coeff * opening[k] * b.outlet_area * (2.0 * GRAVITY * d).sqrt();
            if ((i - q_orifice) * h / b.surface_area).abs() > b.max_depth {
                return Err(k);
            }
            let q = q_orifice.min(s / h + i);
            let available = s + i * h;
            let mut s_new = (s + (i - q) * h).max(0.0);
            let cap = b.max_depth * b.surface_area;
            let f = if s_new > cap {
                let f = (s_new - cap) / h;
                s_new = cap;
                f
            } else {
                0.0
            };
            let m_total = state.mass[k] + inload[k] * h;
            let conc = if available > 1e-12 { m_total / available } else { 0.0 };
            let load = conc * q;
            state.storage[k] = s_new;
            state.mass[k] = conc * s_new * (-b.settling_rate * h).exp();

            if plan.delay_steps[k] == 0 {
                if let Some(dn) = plan.downstream[k] {
                    inflow[dn] += q;
                    inload[dn] += load;
                }
            }
            out.q[k] += w * q;
            out.f[k] += w * f;
            out.i[k] += w * i;
            out.load[k] += w * load;
        }
    }
    Ok(out)
}
