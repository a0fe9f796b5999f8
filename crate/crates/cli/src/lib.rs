//! Problem-file front end for `jetcartan`.
//!
//! Exit codes: 0 when every verdict passes, 2 when a mathematical verdict
//! fails, 1 on input or engine errors.

pub mod commands;
pub mod problem;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use jetcartan;

use problem::Problem;
use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{location}: {message}")]
    Problem { location: String, message: String },
    #[error("no {kind} named `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("{0}")]
    Engine(String),
}

#[derive(Debug, Parser)]
#[command(name = "jetcartan", version, about = "First-order Lagrangian field theory on jet bundles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: PathBuf,
    /// Seed for every random draw; defaults to the problem file's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of printing it.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write per-point grid samples as CSV (only `verify` produces any).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field equations, Poincare-Cartan forms, energy and regularity.
    Derive {
        #[command(flatten)]
        common: Common,
    },
    /// Checks a named field against the symmetry notion it declares.
    CheckSymmetry {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: String,
    },
    /// Builds the conserved current of a named field and checks it on shell.
    Noether {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: String,
    },
    /// Evaluates a current along a solution on a grid.
    Verify {
        #[command(flatten)]
        common: Common,
        /// A named current, or a field whose current is synthesized.
        #[arg(long)]
        current: String,
        #[arg(long)]
        solution: String,
        #[arg(long)]
        grid: String,
        /// Axis (1-based) whose slices carry the charge.
        #[arg(long, default_value_t = 1)]
        time_axis: usize,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Derive { common }
            | Command::CheckSymmetry { common, .. }
            | Command::Noether { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

/// Runs one command and returns its report.
pub fn execute(command: &Command) -> Result<Report, CliError> {
    let common = command.common();
    let problem = Problem::load(&common.problem)?;
    let seed = common.seed.unwrap_or(problem.seed);
    let mut report = match command {
        Command::Derive { .. } => commands::derive(&problem, seed)?,
        Command::CheckSymmetry { field, .. } => commands::check_symmetry(&problem, field, seed)?,
        Command::Noether { field, .. } => commands::noether(&problem, field, seed)?,
        Command::Verify { current, solution, grid, time_axis, .. } => {
            let args =
                commands::VerifyArgs { current, solution, grid, time_axis: *time_axis, csv: common.csv.as_deref() };
            commands::verify(&problem, &args, seed)?
        }
    };
    if common.csv.is_some() && !matches!(command, Command::Verify { .. }) {
        report.warn("--csv ignored: this command produces no grid data");
    }
    Ok(report)
}

/// Runs the command, writes or prints the report, and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let common = cli.command.common();
    match execute(&cli.command) {
        Ok(report) => {
            let json = report.to_json();
            match &common.report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, json) {
                        eprintln!("error: {}: {e}", path.display());
                        return 1;
                    }
                    print!("{}", report.summary());
                }
                None => print!("{json}"),
            }
            if report.passed {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
