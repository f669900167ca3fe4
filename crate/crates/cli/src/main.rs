mod cmd;
mod report;
mod source;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use source::UsageError;

/// Certified recurrences and Monte-Carlo simulation for randomized cuts of
/// cubic graphs.
#[derive(Debug, Parser)]
#[command(name = "girthcut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the recurrences for a schedule and report certified bounds
    Solve(cmd::solve::SolveArgs),
    /// Run the procedure on random cubic graphs
    Simulate(cmd::simulate::SimulateArgs),
    /// Compare the solver with exact enumeration for the first rounds
    Oracle(cmd::oracle::OracleArgs),
    /// Solve a grid of parameter choices
    Sweep(cmd::sweep::SweepArgs),
    /// Find phase lengths from thresholds
    Calibrate(cmd::calibrate::CalibrateArgs),
}

/// Sizes the global worker pool from `GIRTHCUT_THREADS`.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("GIRTHCUT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            source::usage(format!(
                "GIRTHCUT_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Solve(a) => cmd::solve::run(a),
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::Oracle(a) => cmd::oracle::run(a),
        Command::Sweep(a) => cmd::sweep::run(a),
        Command::Calibrate(a) => cmd::calibrate::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
