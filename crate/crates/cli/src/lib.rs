//! Command-line driver for `sandwich-core`.
//!
//! Each subcommand reads and validates all of its inputs before computing
//! anything, then returns its output files in memory. Files are written to
//! `--out` only once everything has succeeded; without `--out` the primary
//! output goes to stdout.

pub mod detect;
pub mod error;
pub mod minsize;
pub mod optimize;
pub mod report;
pub mod simulate;

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use report::Outputs;

#[derive(Debug, Parser)]
#[command(name = "sandwich", version, about = "Sandwich-attack economics, sequencing and detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal frontrun size, profit and expected value for a scenario.
    Optimize(optimize::OptimizeArgs),
    /// Co-inclusion probability, analytic and Monte Carlo.
    Simulate(simulate::SimulateArgs),
    /// Find sandwich triples in a swap-event export.
    Detect(detect::DetectArgs),
    /// Minimum profitable victim size over a parameter grid.
    Minsize(minsize::MinsizeArgs),
}

impl Command {
    /// Runs the subcommand without touching the filesystem outputs.
    pub fn execute(&self) -> CliResult<Outputs> {
        match self {
            Command::Optimize(a) => optimize::run(a),
            Command::Simulate(a) => simulate::run(a),
            Command::Detect(a) => detect::run(a),
            Command::Minsize(a) => minsize::run(a),
        }
    }

    fn out_dir(&self) -> Option<&Path> {
        match self {
            Command::Optimize(a) => a.out.as_deref(),
            Command::Simulate(a) => a.out.as_deref(),
            Command::Detect(a) => Some(&a.out),
            Command::Minsize(a) => a.out.as_deref(),
        }
    }

    /// File printed when there is no output directory.
    fn primary(&self) -> &'static str {
        match self {
            Command::Simulate(a) if a.sweep => "sweep.csv",
            Command::Minsize(_) => "minsize.csv",
            _ => "report.json",
        }
    }
}

/// Runs a parsed command line, writing to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut impl Write) -> CliResult<()> {
    let outputs = cli.command.execute()?;
    match cli.command.out_dir() {
        Some(dir) => outputs.write_to(dir),
        None => {
            let text = outputs.get(cli.command.primary()).unwrap_or_default();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::runtime(format!("cannot write to stdout: {e}")))
        }
    }
}
