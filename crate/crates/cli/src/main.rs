//! `beachlab` command-line driver.
//!
//! Exit codes: 0 success, 2 physics failure (blow-up, non-finite values or
//! a solver failure), 3 bad input or I/O, 4 audit residual above tolerance.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Physics(String),
    Audit(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Physics(_) => 2,
            CliError::Input(_) | CliError::Io(_) => 3,
            CliError::Audit(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Physics(m) | CliError::Audit(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "beachlab", version, about = "Water waves in a tank with a pneumatic absorbing beach")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; `BEACHLAB_OUT` takes precedence.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (used by `convergence`).
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the time integration and write time series and snapshots.
    Simulate(Common),
    /// Evaluate the integral identities and decay estimates on a stored run.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Largest accepted relative residual; overrides `audit.tolerance`.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Directory holding `states.bin`; defaults to the output directory.
        #[arg(long)]
        run: Option<PathBuf>,
    },
    /// Audit the run at three resolutions and report the residual ratios.
    Convergence(Common),
    /// Spectral model on the circle: uniform bounds on Sobolev norms.
    Circle(Common),
    /// One simulation per beach length in `sweep.deltas`.
    Sweep(Common),
}

fn out_dir(requested: PathBuf) -> PathBuf {
    match std::env::var_os("BEACHLAB_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => requested,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, tolerance, run_dir) = match &cli.command {
        Command::Simulate(c) | Command::Convergence(c) | Command::Circle(c) | Command::Sweep(c) => (c, None, None),
        Command::Audit { common, tolerance, run } => (common, *tolerance, run.clone()),
    };
    let out = out_dir(common.out.clone());
    let opts = commands::Options {
        config: &common.config,
        out: &out,
        tolerance,
        threads: common.threads,
        run: run_dir.as_deref(),
    };
    match cli.command {
        Command::Simulate(_) => commands::simulate(&opts),
        Command::Audit { .. } => commands::audit(&opts),
        Command::Convergence(_) => commands::convergence(&opts),
        Command::Circle(_) => commands::circle(&opts),
        Command::Sweep(_) => commands::sweep(&opts),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("beachlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
