use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nmheom_cli::{run_single, run_sweep, Axis, ExperimentConfig, RunError, SweepUnit};
use nmheom_core::Statistics;

#[derive(Parser)]
#[command(
    name = "nmheom",
    version,
    about = "Trace-distance non-Markovianity of a qubit in a Lorentzian bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and write trajectory.csv + summary.json.
    Single(Common),
    /// Evaluate the configured sweep and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep axis (overrides the config).
        #[arg(long)]
        axis: Option<Axis>,
        /// Comma-separated sweep values (overrides the config).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Interpret sweep values as multiples of lambda.
        #[arg(long)]
        in_lambda: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = parse_statistics)]
    statistics: Option<Statistics>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_c: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
}

fn parse_statistics(s: &str) -> Result<Statistics, String> {
    s.parse().map_err(|e: nmheom_core::Error| e.to_string())
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, RunError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.out {
            cfg.output.dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.sampler.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = Some(v);
        }
        if let Some(v) = self.statistics {
            cfg.bath.statistics = v;
            if let Some(s) = cfg.sweep.as_mut() {
                s.statistics = None;
            }
        }
        if let Some(v) = self.chi {
            cfg.coupling.chi = v;
            if let Some(s) = cfg.sweep.as_mut() {
                s.chi = None;
            }
        }
        let overrides = [
            (self.delta, &mut cfg.bath.delta),
            (self.gamma0, &mut cfg.bath.gamma0),
            (self.lambda, &mut cfg.bath.lambda),
            (self.epsilon, &mut cfg.bath.epsilon),
            (self.dt, &mut cfg.propagator.dt),
            (self.t_c, &mut cfg.propagator.t_c),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if self.depth.is_some() {
            cfg.propagator.depth = self.depth;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    let (cfg, sweep) = match cli.command {
        Command::Single(common) => (common.load()?, false),
        Command::Sweep {
            common,
            axis,
            values,
            in_lambda,
        } => {
            let mut cfg = common.load()?;
            if axis.is_some() || values.is_some() {
                let (Some(axis), Some(values)) = (
                    axis.or(cfg.sweep.as_ref().map(|s| s.axis)),
                    values.or(cfg.sweep.as_ref().map(|s| s.values.clone())),
                ) else {
                    return Err(RunError::Config(
                        "sweep needs both an axis and values".into(),
                    ));
                };
                let mut section = cfg
                    .sweep
                    .take()
                    .unwrap_or(nmheom_cli::config::SweepSection {
                        axis,
                        values: vec![],
                        unit: SweepUnit::Absolute,
                        chi: None,
                        statistics: None,
                    });
                section.axis = axis;
                section.values = values;
                cfg.sweep = Some(section);
            }
            if in_lambda {
                if let Some(s) = cfg.sweep.as_mut() {
                    s.unit = SweepUnit::Lambda;
                }
            }
            if cfg.sweep.is_none() {
                return Err(RunError::Config(
                    "no sweep configured: add a [sweep] section or pass --axis and --values".into(),
                ));
            }
            (cfg, true)
        }
    };
    cfg.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| RunError::Config(format!("cannot start worker pool: {e}")))?;
    let out = cfg.output.dir.clone();

    pool.install(|| {
        if sweep {
            let rows = run_sweep(&cfg, &out)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            eprintln!(
                "wrote {} rows to {} ({failed} failed)",
                rows.len(),
                out.join(nmheom_cli::runner::SWEEP_FILE).display()
            );
        } else {
            let s = run_single(&cfg, &out)?;
            eprintln!(
                "N = {:.6e} at (theta, phi) = ({:.4}, {:.4}), depth {}; results in {}",
                s.nonmarkovianity,
                s.best_theta,
                s.best_phi,
                s.depth.depth,
                out.display()
            );
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
