use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use girthcut_core::oracle::{compare, exact_small_k, COMPARE_SLACK};
use girthcut_core::recurrence::{solve, SolveOptions, StateVector};

use crate::source::{output, precision, usage, ScheduleArgs};

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: ScheduleArgs,
    /// Round to compare at
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub k: u32,
    /// Mantissa bits for the solver
    #[arg(long, default_value_t = 256)]
    pub precision: u32,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(a: OracleArgs) -> anyhow::Result<bool> {
    let src = a.source.load()?;
    let ctx = precision(a.precision)?;
    let schedule = src.schedule();
    if schedule.rounds() < a.k {
        return Err(usage(format!(
            "schedule has only {} rounds, --k {} requested",
            schedule.rounds(),
            a.k
        )));
    }
    let exact = exact_small_k(&schedule, a.k)?;
    let mut rows: Vec<StateVector> = Vec::new();
    solve(
        &schedule.truncated(a.k),
        ctx,
        &SolveOptions::every(1),
        &mut rows,
    )?;
    let st = rows
        .iter()
        .find(|s| s.k == a.k)
        .expect("solver emits every round");
    let cmp = compare(&exact, st)?;

    let mut out = output(a.out.as_deref())?;
    writeln!(
        out,
        "{:<6} {:>22} {:>22} {:>12} {:>12}  ok",
        "field", "exact", "solver", "deviation", "solver err"
    )?;
    for f in &cmp.fields {
        writeln!(
            out,
            "{:<6} {:>22.15e} {:>22.15e} {:>12.3e} {:>12.3e}  {}",
            f.field,
            f.exact,
            f.solver,
            f.deviation,
            f.solver_err,
            if f.ok { "yes" } else { "NO" }
        )?;
    }
    let pass = cmp.all_ok();
    writeln!(
        out,
        "{} at k = {}: max deviation {:.3e} (allowed solver err + {COMPARE_SLACK:e})",
        if pass { "PASS" } else { "FAIL" },
        a.k,
        cmp.max_deviation()
    )?;
    out.flush()?;
    Ok(pass)
}
