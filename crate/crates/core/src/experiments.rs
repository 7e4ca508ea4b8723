//! Scenario orchestration and multi-seed parameter sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{build_plan, GainTable};
use crate::clustering::{form_clusters_with, place_dbs, ClusterRules, Clustering};
use crate::mobility::{spawn_vehicles, step};
use crate::scenario::{make_rng, ScenarioConfig, ScenarioState};
use crate::{Error, Result};

/// Default number of seeds averaged per sweep point.
pub const DEFAULT_SEEDS: usize = 500;

/// How vehicles are attached to stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Filtered DBSCAN with drone placement.
    Proposed,
    /// Unfiltered ε / MinPoints DBSCAN with drone placement.
    PlainDbscan,
    /// Every vehicle on the macro cell.
    MbsOnly,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::PlainDbscan => "plain_dbscan",
            Method::MbsOnly => "mbs_only",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "plain_dbscan" => Ok(Method::PlainDbscan),
            "mbs_only" => Ok(Method::MbsOnly),
            other => Err(Error::InvalidSweep(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Drone coverage radius `r_k`.
    DbsRadius,
    /// Clustering distance `epsilon_m`.
    Epsilon,
    MinPoints,
}

impl SweepParam {
    pub fn label(self) -> &'static str {
        match self {
            SweepParam::DbsRadius => "dbs_radius",
            SweepParam::Epsilon => "epsilon",
            SweepParam::MinPoints => "min_points",
        }
    }

    /// Copy of `config` with this parameter set to `value`.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut out = config.clone();
        match self {
            SweepParam::DbsRadius => out.r_k = value,
            SweepParam::Epsilon => out.epsilon_m = value,
            SweepParam::MinPoints => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::InvalidSweep(format!(
                        "min_points must be a positive integer, got {value}"
                    )));
                }
                out.min_points = value as usize;
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dbs_radius" => Ok(SweepParam::DbsRadius),
            "epsilon" => Ok(SweepParam::Epsilon),
            "min_points" => Ok(SweepParam::MinPoints),
            other => Err(Error::InvalidSweep(format!("unknown parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    /// Strictly increasing.
    pub values: Vec<f64>,
    /// Seeds `0..seeds` are run for every value.
    pub seeds: usize,
    pub base_config: ScenarioConfig,
    pub baseline: Method,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("no sweep values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSweep(
                "values must be strictly increasing".into(),
            ));
        }
        if self.seeds == 0 {
            return Err(Error::InvalidSweep("at least one seed is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean_se: f64,
    /// Sample standard deviation across seeds; zero for a single seed.
    pub std_se: f64,
    pub seeds: usize,
}

impl SweepRow {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_se / (self.seeds as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParam,
    pub method: Method,
    pub rows: Vec<SweepRow>,
    pub config: ScenarioConfig,
    /// Seconds since the Unix epoch at completion.
    pub timestamp_s: u64,
    pub revision: String,
}

/// Totals of one evaluated snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub seed: u64,
    pub total_se: f64,
    pub per_user_se: BTreeMap<usize, f64>,
    pub clusters: usize,
    pub mbs_users: usize,
    pub unserved: usize,
}

/// Spawns, optionally warms up, clusters and places drones for one seed.
pub fn build_state(config: &ScenarioConfig, seed: u64, method: Method) -> Result<ScenarioState> {
    let mut rng = make_rng(seed, "mobility");
    let mut vehicles = spawn_vehicles(config, &mut rng);
    for _ in 0..config.warmup_steps {
        vehicles = vehicles
            .iter()
            .map(|v| step(v, config.step_dt_s, config, &mut rng))
            .collect::<Result<_>>()?;
    }
    let time_s = config.warmup_steps as f64 * config.step_dt_s;

    let clustering = match method {
        Method::Proposed => form_clusters_with(&vehicles, config, ClusterRules::PROPOSED)?,
        Method::PlainDbscan => form_clusters_with(&vehicles, config, ClusterRules::PLAIN)?,
        Method::MbsOnly => Clustering {
            clusters: Vec::new(),
            unclustered: vehicles.iter().map(|v| v.id).collect(),
        },
    };
    let dbs_list = place_dbs(&clustering.clusters, config);
    Ok(ScenarioState {
        vehicles,
        clusters: clustering.clusters,
        dbs_list,
        mbs_users: clustering.unclustered,
        mbs_position: config.mbs_position(),
        time_s,
    })
}

/// Runs the proposed pipeline for one seed.
pub fn run_scenario(config: &ScenarioConfig, seed: u64) -> Result<ScenarioOutcome> {
    run_scenario_with(config, seed, Method::Proposed)
}

pub fn run_scenario_with(
    config: &ScenarioConfig,
    seed: u64,
    method: Method,
) -> Result<ScenarioOutcome> {
    let run = || -> Result<ScenarioOutcome> {
        let state = build_state(config, seed, method)?;
        let gains = GainTable::from_state(&state, config);
        let plan = build_plan(&state, &gains, config)?;
        Ok(ScenarioOutcome {
            seed,
            total_se: plan.total_se,
            per_user_se: plan.per_user_se,
            clusters: state.clusters.len(),
            mbs_users: state.mbs_users.len(),
            unserved: plan.unserved.len(),
        })
    };
    run().map_err(|e| Error::Scenario {
        seed,
        source: Box::new(e),
    })
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Averages total efficiency over `seeds`. Seeds run in parallel but are
/// reduced in ascending seed order, so the result ignores input order.
pub fn run_point(
    config: &ScenarioConfig,
    seeds: &[u64],
    method: Method,
    value: f64,
) -> Result<SweepRow> {
    let mut ordered = seeds.to_vec();
    ordered.sort_unstable();
    let totals: Vec<f64> = ordered
        .par_iter()
        .map(|&seed| run_scenario_with(config, seed, method).map(|o| o.total_se))
        .collect::<Result<_>>()?;
    let (mean_se, std_se) = mean_and_std(&totals);
    Ok(SweepRow {
        value,
        mean_se,
        std_se,
        seeds: totals.len(),
    })
}

/// Runs every sweep value with seeds `0..spec.seeds` using `spec.baseline`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let seeds: Vec<u64> = (0..spec.seeds as u64).collect();
    let rows = spec
        .values
        .iter()
        .map(|&value| {
            let config = spec.parameter.apply(&spec.base_config, value)?;
            run_point(&config, &seeds, spec.baseline, value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        parameter: spec.parameter,
        method: spec.baseline,
        rows,
        config: spec.base_config.clone(),
        timestamp_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        revision: revision().to_string(),
    })
}

/// Same as [`run_sweep`] but refuses the proposed method.
pub fn run_baseline(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.baseline == Method::Proposed {
        return Err(Error::InvalidSweep(
            "baseline must be plain_dbscan or mbs_only".into(),
        ));
    }
    run_sweep(spec)
}

pub fn revision() -> &'static str {
    concat!("v", env!("CARGO_PKG_VERSION"))
}
