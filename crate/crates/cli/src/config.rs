//! Experiment configuration, read from TOML.
//!
//! Every field has a default; an empty file reproduces the baseline run
//! (`epsilon = 2`, `lambda = 0.1`, `gamma0 = 0.02`, `t_c = 50`). All quantities
//! are in the dimensionless units of those values.
//!
//! ```toml
//! [bath]
//! delta = 1.0
//! statistics = "fermi"
//!
//! [coupling]
//! chi = 1.0
//!
//! [sweep]
//! axis = "delta"
//! unit = "lambda"
//! values = [0, 1, 2, 3, 4, 5]
//! chi = [0.0, 1.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nmheom_core::{BathModel, CouplingOperator, PropagatorConfig, Sampler, Statistics};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma0: f64,
    pub delta: f64,
    pub statistics: Statistics,
}

impl Default for BathSection {
    fn default() -> Self {
        let b = BathModel::baseline();
        BathSection {
            epsilon: b.epsilon,
            lambda: b.lambda,
            gamma0: b.gamma0,
            delta: b.delta,
            statistics: b.statistics,
        }
    }
}

impl BathSection {
    pub fn model(&self) -> BathModel {
        BathModel {
            epsilon: self.epsilon,
            lambda: self.lambda,
            gamma0: self.gamma0,
            delta: self.delta,
            statistics: self.statistics,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub chi: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection { chi: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorSection {
    pub dt: f64,
    pub t_c: f64,
    /// Starting depth; when absent, 2 for `chi = 0` and 10 otherwise.
    pub depth: Option<usize>,
    pub depth_tolerance: f64,
    pub max_depth: usize,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        let p = PropagatorConfig::default();
        PropagatorSection {
            dt: p.dt,
            t_c: p.t_final,
            depth: None,
            depth_tolerance: p.depth_tolerance,
            max_depth: p.max_depth,
        }
    }
}

impl PropagatorSection {
    pub fn config_for(&self, coupling: &CouplingOperator) -> PropagatorConfig {
        let base = PropagatorConfig::for_coupling(coupling);
        PropagatorConfig {
            dt: self.dt,
            t_final: self.t_c,
            depth: self.depth.unwrap_or(base.depth),
            depth_tolerance: self.depth_tolerance,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Delta,
    Chi,
    Gamma0,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Delta => "delta",
            Axis::Chi => "chi",
            Axis::Gamma0 => "gamma0",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "delta" => Ok(Axis::Delta),
            "chi" => Ok(Axis::Chi),
            "gamma0" => Ok(Axis::Gamma0),
            other => Err(format!(
                "unknown sweep axis {other:?} (delta, chi or gamma0)"
            )),
        }
    }
}

/// Unit of the sweep values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepUnit {
    #[default]
    Absolute,
    /// Multiples of the spectral width `lambda`.
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub unit: SweepUnit,
    /// Coupling strengths evaluated at every sweep value; defaults to
    /// `coupling.chi`. Ignored when the axis is `chi`.
    #[serde(default)]
    pub chi: Option<Vec<f64>>,
    /// Statistics evaluated at every sweep value; defaults to
    /// `bath.statistics`.
    #[serde(default)]
    pub statistics: Option<Vec<Statistics>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub bath: BathSection,
    pub coupling: CouplingSection,
    pub propagator: PropagatorSection,
    pub sampler: Sampler,
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Checks physical ranges of the base point and of every sweep value.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        self.bath
            .model()
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        CouplingOperator::new(self.coupling.chi).map_err(|e| RunError::Config(e.to_string()))?;
        let coupling = CouplingOperator::new(self.coupling.chi).unwrap();
        self.propagator
            .config_for(&coupling)
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        if let Some(depth) = self.propagator.depth {
            if depth > self.propagator.max_depth {
                return bad(format!(
                    "starting depth {depth} exceeds max_depth {}",
                    self.propagator.max_depth
                ));
            }
        }
        self.sampler
            .pairs()
            .map_err(|e| RunError::Config(e.to_string()))?;
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return bad("sweep.values is empty".into());
            }
            if sweep.axis == Axis::Chi && sweep.unit == SweepUnit::Lambda {
                return bad("the chi axis is dimensionless; use unit = \"absolute\"".into());
            }
            for (bath, chi) in self
                .sweep_points()?
                .iter()
                .flat_map(|p| p.chis.iter().map(move |&c| (p.bath, c)))
            {
                bath.validate()
                    .map_err(|e| RunError::Config(e.to_string()))?;
                CouplingOperator::new(chi).map_err(|e| RunError::Config(e.to_string()))?;
            }
            if matches!(&sweep.chi, Some(v) if v.is_empty())
                || matches!(&sweep.statistics, Some(v) if v.is_empty())
            {
                return bad("sweep.chi / sweep.statistics must not be empty lists".into());
            }
        }
        Ok(())
    }

    /// Expands the sweep into one entry per axis value, in file order.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>, RunError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| RunError::Config("no [sweep] section".into()))?;
        let scale = match sweep.unit {
            SweepUnit::Absolute => 1.0,
            SweepUnit::Lambda => self.bath.lambda,
        };
        let statistics = sweep
            .statistics
            .clone()
            .unwrap_or_else(|| vec![self.bath.statistics]);
        let base_chis = sweep.chi.clone().unwrap_or_else(|| vec![self.coupling.chi]);
        Ok(sweep
            .values
            .iter()
            .map(|&v| {
                let x = v * scale;
                let mut bath = self.bath.model();
                let mut chis = base_chis.clone();
                match sweep.axis {
                    Axis::Delta => bath.delta = x,
                    Axis::Gamma0 => bath.gamma0 = x,
                    Axis::Chi => chis = vec![x],
                }
                SweepPoint {
                    axis: sweep.axis,
                    value: v,
                    bath,
                    chis,
                    statistics: statistics.clone(),
                }
            })
            .collect())
    }
}

/// One value of the sweep axis and the combinations evaluated there.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub axis: Axis,
    /// Value as written in the config (before unit scaling).
    pub value: f64,
    pub bath: BathModel,
    pub chis: Vec<f64>,
    pub statistics: Vec<Statistics>,
}
