//! Command-line front end: config-driven metric evaluation, verification suites and
//! oracle comparisons.

pub mod compare;
pub mod config;
pub mod eval;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("domain or regularity error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    /// Maps a library error raised while evaluating at `point`.
    pub fn from_eval(err: wstar_geom::Error, point: &[f64]) -> Self {
        use wstar_geom::Error as E;
        let msg = format!("at m = {point:?}: {err}");
        match err {
            E::OutOfDomain { .. }
            | E::StepUnderflow { .. }
            | E::NotJRegular { .. }
            | E::NotPositive(_)
            | E::NotAbsolutelyContinuous(_) => CliError::Domain(msg),
            E::InvalidShape(_) | E::ShapeMismatch { .. } | E::NotSelfAdjoint(_) | E::InvalidArgument(_) => {
                CliError::Config(msg)
            }
            _ => CliError::Numerical(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wstar-geom", version, about = "Jordan-algebraic information geometry on finite-dimensional W*-algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (default: stdout, or the path in the config)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the metric tensor over the configured grid
    EvalMetric {
        /// Evaluate at the parameter points of a previous JSON output instead of the grid
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Run the verification suites
    Verify {
        /// Suite to run (repeatable; default: config selection or all)
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Trial count for every selected suite
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Compare library results against the independent oracles
    OracleCompare {
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// Runs a parsed command line, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Numerical(e.to_string()))?;
    let format = cli.format.or(cfg.output.format).unwrap_or_default();
    let path = cli.output.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));

    pool.install(|| match &cli.command {
        Command::EvalMetric { points } => {
            if cli.config.is_none() {
                return Err(CliError::Config("eval-metric needs --config".into()));
            }
            let records = eval::evaluate(&cfg, points.as_deref())?;
            output::emit(&output::render_records(&records, format), path.as_deref())
        }
        Command::Verify { suites, trials } => {
            let outcomes = verify::run(&cfg, suites, *trials, cli.seed)?;
            output::emit(&verify::render(&outcomes, format), path.as_deref())?;
            let failed: Vec<String> = outcomes
                .iter()
                .filter(|o| !o.report.pass)
                .map(|o| format!("{} (worst case: {})", o.report.name, o.worst))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join("; ")))
            }
        }
        Command::OracleCompare { trials } => {
            let reports = compare::run(&cfg, *trials, cli.seed)?;
            output::emit(&compare::render(&reports, format), path.as_deref())?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(format!("oracle mismatch: {}", failed.join(", "))))
            }
        }
    })
}
