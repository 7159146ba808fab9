//! Configuration-driven runner: single parameter points and sweeps, with CSV
//! and JSON output.

pub mod config;
pub mod error;
pub mod runner;

pub use config::{Axis, ExperimentConfig, SweepUnit};
pub use error::RunError;
pub use runner::{compute_sweep, evaluate_point, run_single, run_sweep, SingleSummary, SweepRow};
