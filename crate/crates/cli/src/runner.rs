//! Single runs and parameter sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nmheom_core::heom::converged_map;
use nmheom_core::measure::{distance_series_from_map, maximize_with_map, pair_states};
use nmheom_core::{
    BathModel, CouplingOperator, DepthVerdict, DynamicalMap, MeasureResult, Statistics,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Axis, ExperimentConfig, SweepPoint};
use crate::error::RunError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RUNTIME_FILE: &str = "runtime.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Result of evaluating the measure at one parameter point.
#[derive(Clone, Debug)]
pub struct PointOutcome {
    pub measure: MeasureResult,
    pub depth: DepthVerdict,
    pub map: DynamicalMap,
}

fn describe(bath: &BathModel, chi: f64) -> String {
    format!(
        "epsilon={} lambda={} gamma0={} delta={} chi={} statistics={}",
        bath.epsilon, bath.lambda, bath.gamma0, bath.delta, chi, bath.statistics
    )
}

/// Converges the hierarchy depth for `(bath, chi)` and maximizes the measure
/// over the configured initial pairs.
pub fn evaluate_point(
    cfg: &ExperimentConfig,
    bath: BathModel,
    chi: f64,
) -> Result<PointOutcome, RunError> {
    let numerical = |source| RunError::Numerical {
        point: describe(&bath, chi),
        source,
    };
    let coupling = CouplingOperator::new(chi).map_err(|e| RunError::Config(e.to_string()))?;
    let prop = cfg.propagator.config_for(&coupling);
    let (depth, map) = converged_map(&bath, &coupling, &prop).map_err(numerical)?;
    let measure =
        maximize_with_map(&map, &cfg.sampler, prop.t_final, prop.dt).map_err(numerical)?;
    if !measure.value.is_finite() {
        return Err(numerical(nmheom_core::Error::Divergence {
            time: prop.t_final,
            reason: "non-finite measure".into(),
        }));
    }
    Ok(PointOutcome {
        measure,
        depth,
        map,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthSummary {
    pub converged: bool,
    pub depth: usize,
    pub residual: f64,
    pub tolerance: f64,
}

/// Contents of `summary.json`. Key order is the field order.
#[derive(Clone, Debug, Serialize)]
pub struct SingleSummary {
    pub nonmarkovianity: f64,
    pub best_theta: f64,
    pub best_phi: f64,
    pub chi: f64,
    pub statistics: Statistics,
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma0: f64,
    pub delta: f64,
    pub t_c: f64,
    pub dt: f64,
    pub pairs_evaluated: usize,
    pub seed: u64,
    pub depth: DepthSummary,
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))
}

fn write_file(path: PathBuf, contents: &[u8]) -> Result<(), RunError> {
    fs::write(&path, contents).map_err(|e| RunError::io(path, e))
}

/// Full-precision float (17 significant digits).
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> RunError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    RunError::io(path, source)
}

/// Runs the base point of `cfg` and writes `trajectory.csv`, `summary.json`
/// and `runtime.json` into `out`.
///
/// The trajectory is the first state of the optimal pair, alongside the trace
/// distance of that pair. `runtime.json` is kept apart so the other two
/// files are byte-identical across repeated runs.
pub fn run_single(cfg: &ExperimentConfig, out: &Path) -> Result<SingleSummary, RunError> {
    cfg.validate()?;
    let started = Instant::now();
    let bath = cfg.bath.model();
    let chi = cfg.coupling.chi;
    let outcome = evaluate_point(cfg, bath, chi)?;
    let best = outcome.measure.best_pair;

    create_dir(out)?;
    let traj_path = out.join(TRAJECTORY_FILE);
    let (rho1, _) = pair_states(best);
    let distance =
        distance_series_from_map(&outcome.map, best).map_err(|source| RunError::Numerical {
            point: describe(&bath, chi),
            source,
        })?;
    let mut w = csv::Writer::from_path(&traj_path).map_err(|e| csv_err(&traj_path, e))?;
    w.write_record(["t", "rho_ee", "re_rho_eg", "im_rho_eg", "d_optimal_pair"])
        .map_err(|e| csv_err(&traj_path, e))?;
    for (k, &t) in outcome.map.times().iter().enumerate() {
        let rho = outcome.map.apply(k, &rho1);
        w.write_record([
            fmt_f64(t),
            fmt_f64(rho.ee().re),
            fmt_f64(rho.eg().re),
            fmt_f64(rho.eg().im),
            fmt_f64(distance[k]),
        ])
        .map_err(|e| csv_err(&traj_path, e))?;
    }
    w.flush().map_err(|e| RunError::io(&traj_path, e))?;

    let summary = SingleSummary {
        nonmarkovianity: outcome.measure.value,
        best_theta: best.theta,
        best_phi: best.phi,
        chi,
        statistics: bath.statistics,
        epsilon: bath.epsilon,
        lambda: bath.lambda,
        gamma0: bath.gamma0,
        delta: bath.delta,
        t_c: cfg.propagator.t_c,
        dt: cfg.propagator.dt,
        pairs_evaluated: outcome.measure.per_pair.len(),
        seed: cfg.sampler.seed,
        depth: DepthSummary {
            converged: true,
            depth: outcome.depth.depth,
            residual: outcome.depth.residual,
            tolerance: outcome.depth.tolerance,
        },
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write_file(out.join(SUMMARY_FILE), json.as_bytes())?;

    let runtime = serde_json::json!({ "runtime_seconds": started.elapsed().as_secs_f64() });
    write_file(out.join(RUNTIME_FILE), format!("{runtime}\n").as_bytes())?;
    Ok(summary)
}

/// One row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub value: f64,
    pub chi: f64,
    pub statistics: Statistics,
    pub outcome: Result<SweepValues, String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepValues {
    pub nonmarkovianity: f64,
    pub best_theta: f64,
    pub best_phi: f64,
    pub depth: usize,
}

impl SweepRow {
    pub fn nonmarkovianity(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|v| v.nonmarkovianity)
    }
}

/// Evaluates every `(value, chi, statistics)` combination of the sweep.
///
/// Points run in parallel on the current rayon pool; rows come back in
/// config order (value, then chi, then statistics). Failing points are
/// recorded in the row rather than aborting the sweep.
pub fn compute_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, RunError> {
    cfg.validate()?;
    let jobs: Vec<(SweepPoint, f64, Statistics)> = cfg
        .sweep_points()?
        .into_iter()
        .flat_map(|p| {
            let combos: Vec<_> = p
                .chis
                .iter()
                .flat_map(|&c| p.statistics.iter().map(move |&s| (c, s)))
                .collect();
            combos.into_iter().map(move |(c, s)| (p.clone(), c, s))
        })
        .collect();

    Ok(jobs
        .into_par_iter()
        .map(|(point, chi, statistics)| {
            let bath = point.bath.with_statistics(statistics);
            let outcome = evaluate_point(cfg, bath, chi)
                .map(|o| SweepValues {
                    nonmarkovianity: o.measure.value,
                    best_theta: o.measure.best_pair.theta,
                    best_phi: o.measure.best_pair.phi,
                    depth: o.depth.depth,
                })
                .map_err(|e| e.to_string());
            SweepRow {
                axis: point.axis,
                value: point.value,
                chi,
                statistics,
                outcome,
            }
        })
        .collect())
}

pub const SWEEP_HEADER: [&str; 9] = [
    "axis",
    "value",
    "chi",
    "statistics",
    "nonmarkovianity",
    "best_theta",
    "best_phi",
    "depth",
    "error",
];

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(SWEEP_HEADER).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let head = [
            row.axis.to_string(),
            fmt_f64(row.value),
            fmt_f64(row.chi),
            row.statistics.to_string(),
        ];
        let tail = match &row.outcome {
            Ok(v) => [
                fmt_f64(v.nonmarkovianity),
                fmt_f64(v.best_theta),
                fmt_f64(v.best_phi),
                v.depth.to_string(),
                String::new(),
            ],
            Err(msg) => [
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                msg.clone(),
            ],
        };
        w.write_record(head.iter().chain(tail.iter()))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| RunError::io(path, e))
}

/// Computes the sweep and writes `sweep.csv` into `out`.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SweepRow>, RunError> {
    let rows = compute_sweep(cfg)?;
    create_dir(out)?;
    write_sweep_csv(&rows, &out.join(SWEEP_FILE))?;
    Ok(rows)
}
