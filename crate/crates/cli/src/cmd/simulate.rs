use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use girthcut_core::mc_sim::{
    count_short_cycles, estimate, gen_cubic, write_report, CutPolicy, Engine, EstimateOptions,
    Stat, Summary, MAX_CYCLE_LEN,
};
use girthcut_core::numerics::PrecisionContext;
use girthcut_core::recurrence::{solve, NullSink, SolveOptions};
use serde::Serialize;

use crate::source::{output, usage, ScheduleArgs};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ScheduleArgs,
    /// Vertices per graph (even, at least 4)
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub samples: u32,
    /// Sample i uses seed + i
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where leftover white vertices go: greedy or all-blue
    #[arg(long, default_value = "greedy")]
    pub policy: String,
    /// event (default) or sync
    #[arg(long, default_value = "event")]
    pub engine: String,
    /// Count cycles up to this length in the first sample's graph
    #[arg(long, value_name = "LMAX", value_parser = clap::value_parser!(u32).range(3..=MAX_CYCLE_LEN as i64))]
    pub girth_report: Option<u32>,
    /// Also solve the recurrences at 53 bits and report deviations
    #[arg(long)]
    pub compare: bool,
    /// Per-sample CSV (default stdout; the summary then goes to stderr)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write the summary as JSON here
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Comparison {
    field: &'static str,
    solver: f64,
    mean: f64,
    std_error: f64,
    z: f64,
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    source: String,
    n: u64,
    seed: u64,
    policy: CutPolicy,
    engine: Engine,
    stats: Summary,
    /// Cycle counts of lengths 3.. in the first sample's graph.
    short_cycles: Option<Vec<u64>>,
    /// Upper bound on the share of vertices lying on a counted cycle.
    short_cycle_vertex_share: Option<f64>,
    comparison: Vec<Comparison>,
}

pub fn run(a: SimulateArgs) -> anyhow::Result<bool> {
    let src = a.source.load()?;
    if a.n < 4 || a.n % 2 != 0 {
        return Err(usage(format!(
            "--n must be even and at least 4, got {}",
            a.n
        )));
    }
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let policy: CutPolicy = a
        .policy
        .parse()
        .map_err(|e| usage(format!("--policy: {e}")))?;
    let engine: Engine = a
        .engine
        .parse()
        .map_err(|e| usage(format!("--engine: {e}")))?;
    let schedule = src.schedule();
    let start = Instant::now();
    let opts = EstimateOptions {
        n: a.n,
        samples: a.samples,
        seed: a.seed,
        engine,
        policy,
    };
    let (rows, stats) = estimate(&schedule, &opts)?;

    let cycles = match a.girth_report {
        Some(lmax) => Some(count_short_cycles(&gen_cubic(a.n, a.seed)?, lmax as usize)),
        None => None,
    };
    let mut comparison = Vec::new();
    if a.compare {
        let sol = solve(
            &schedule,
            PrecisionContext::quick(),
            &SolveOptions::every(u32::MAX),
            &mut NullSink,
        )?;
        let f = &sol.final_state;
        let fields: [(&'static str, f64, &Stat); 4] = [
            ("per_edge_fraction", f.p.to_f64(), &stats.per_edge_fraction),
            ("red_fraction", f.r.to_f64(), &stats.red_fraction),
            ("blue_fraction", f.b.to_f64(), &stats.blue_fraction),
            ("white_fraction", f.w.to_f64(), &stats.white_fraction),
        ];
        for (field, solver, st) in fields {
            comparison.push(Comparison {
                field,
                solver,
                mean: st.mean,
                std_error: st.std_error,
                z: st.z(solver),
            });
        }
    }
    let summary = SimulationSummary {
        source: src.label.clone(),
        n: a.n,
        seed: a.seed,
        policy,
        engine,
        short_cycle_vertex_share: cycles
            .as_ref()
            .map(|h| h.vertex_bound() as f64 / a.n as f64),
        short_cycles: cycles.map(|h| h.counts),
        stats,
        comparison,
    };

    let mut csv = output(a.out.as_deref())?;
    write_report(&mut csv, &rows)?;
    csv.flush()?;
    drop(csv);
    let text = summary_text(&summary);
    if a.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    if let Some(path) = &a.summary {
        let mut out = output(Some(path))?;
        serde_json::to_writer_pretty(&mut out, &summary)?;
        writeln!(out)?;
        out.flush()?;
    }
    eprintln!("wall time {:.2} s", start.elapsed().as_secs_f64());
    Ok(true)
}

fn stat_line(s: &mut String, name: &str, st: &Stat) {
    write!(s, "{name:<20} mean {:.10}", st.mean).unwrap();
    match st.ci99 {
        Some((lo, hi)) => writeln!(s, "  sd {:.3e}  99% CI [{lo:.10}, {hi:.10}]", st.sd).unwrap(),
        None => writeln!(s, "  (one sample: no interval)").unwrap(),
    }
}

fn summary_text(sum: &SimulationSummary) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{} samples, n = {}, seeds {}.., schedule {}, policy {}",
        sum.stats.samples, sum.n, sum.seed, sum.source, sum.policy
    )
    .unwrap();
    let st = &sum.stats;
    stat_line(&mut s, "per_edge_fraction", &st.per_edge_fraction);
    stat_line(&mut s, "per_vertex_fraction", &st.per_vertex_fraction);
    stat_line(&mut s, "red", &st.red_fraction);
    stat_line(&mut s, "blue", &st.blue_fraction);
    stat_line(&mut s, "white", &st.white_fraction);
    if let Some(counts) = &sum.short_cycles {
        let parts: Vec<String> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}:{c}", i + 3))
            .collect();
        writeln!(s, "short cycles         {}", parts.join(" ")).unwrap();
        writeln!(
            s,
            "vertices on them     <= {:.3e} of n",
            sum.short_cycle_vertex_share.unwrap_or(0.0)
        )
        .unwrap();
    }
    for c in &sum.comparison {
        writeln!(
            s,
            "{:<20} solver {:.10}  simulated {:.10}  |z| = {:.2}",
            c.field, c.solver, c.mean, c.z
        )
        .unwrap();
    }
    s
}
