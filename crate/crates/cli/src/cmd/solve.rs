use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use girthcut_core::recurrence::{solve, CsvTrajectory, NullSink, SolveOptions};

use crate::report::{RunReport, ScheduleSummary, DIGITS};
use crate::source::{output, precision, usage, ScheduleArgs};

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: ScheduleArgs,
    /// Mantissa bits
    #[arg(long, default_value_t = 256)]
    pub precision: u32,
    /// Report file (default stdout)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
    /// Stream the trajectory to this CSV file
    #[arg(long, value_name = "PATH")]
    pub trajectory: Option<PathBuf>,
    /// Trajectory stride in rounds
    #[arg(long, default_value_t = 1000, requires = "trajectory")]
    pub every: u32,
    /// Extra trajectory rounds, comma-separated
    #[arg(
        long,
        value_name = "K,...",
        value_delimiter = ',',
        requires = "trajectory"
    )]
    pub rounds: Vec<u32>,
}

pub fn run(a: SolveArgs) -> anyhow::Result<bool> {
    let src = a.source.load()?;
    let ctx = precision(a.precision)?;
    if a.every == 0 {
        return Err(usage("--every must be at least 1"));
    }
    let schedule = src.schedule();
    let mut opts = SolveOptions::every(a.every);
    for &k in &a.rounds {
        opts = opts.with_round(k);
    }
    let start = Instant::now();
    let sol = match &a.trajectory {
        Some(path) => {
            let mut sink = CsvTrajectory::with_digits(output(Some(path))?, DIGITS);
            let sol = solve(&schedule, ctx, &opts, &mut sink)?;
            sink.finish()?.flush()?;
            sol
        }
        None => solve(&schedule, ctx, &opts, &mut NullSink)?,
    };
    let wall = start.elapsed().as_secs_f64();
    let report = RunReport::new(
        ScheduleSummary::new(&src.label, &schedule, src.params()),
        a.precision,
        &sol,
        wall,
    );
    let mut out = output(a.out.as_deref())?;
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", report.to_text())?;
    }
    out.flush()?;
    eprintln!("wall time {:.2} s", report.wall_seconds);
    Ok(true)
}
