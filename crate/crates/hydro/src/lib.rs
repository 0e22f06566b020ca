//! Stormwater network simulation and the control scenarios built on it.
//!
//! - [`hydrosim`]: level-pool routing with valves, flooding and pollutant load
//! - [`storm`]: design storms and storm ensembles
//! - [`scenarios`]: performance metrics, scenario configs and objectives

pub mod error;
pub mod hydrosim;
pub mod scenarios;
pub mod storm;

pub use error::{HydroError, Result};
pub use hydrosim::{simulate, Basin, Baseflow, Edge, NetworkTopology, SimResult, VolumeBudget};
pub use scenarios::{
    empirical_uncertainty, load_scenario, make_objective, metric_epsilon, metric_gamma, metric_theta, MetricKind,
    MetricParams, Scenario, ScenarioObjective, StormSelector,
};
pub use storm::{generate_design_storm, generate_storm_ensemble, Burst, StormEvent, StormKind};
