use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use girthcut_core::recurrence::{
    phase_calibration, solve, NullSink, SolveOptions, ThresholdReading,
};
use girthcut_core::schedule::{format_prob, parse_prob, PaperParams, Prob};
use rayon::prelude::*;

use crate::report::DIGITS;
use crate::source::{list, output, precision, usage, ScheduleArgs};

pub const SWEEP_HEADER: &str = "p0,pR,pB,pRB,K1,K2,p_K,err,r_K,b_K,w_K";

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Base parameters (default: the built-in ones); must use the parameter form
    #[command(flatten)]
    pub source: ScheduleArgs,
    /// Values of p0, comma-separated
    #[arg(long, value_name = "LIST")]
    pub p0: Option<String>,
    #[arg(long = "pr", value_name = "LIST")]
    pub p_red: Option<String>,
    #[arg(long = "pb", value_name = "LIST")]
    pub p_blue: Option<String>,
    #[arg(long = "prb", value_name = "LIST")]
    pub p_mixed: Option<String>,
    /// Fixed phase-one length
    #[arg(long)]
    pub k1: Option<u32>,
    /// Fixed phase-two length
    #[arg(long)]
    pub k2: Option<u32>,
    /// Calibrate both phase lengths per grid point at this threshold
    #[arg(long, conflicts_with_all = ["k1", "k2"])]
    pub theta: Option<f64>,
    #[arg(long, default_value = "unconditional")]
    pub reading: String,
    /// Round cap for calibration
    #[arg(long, default_value_t = 5_000_000)]
    pub k_max: u32,
    /// Mantissa bits; below about 80 the bounds degrade to [0, 1]
    #[arg(long, default_value_t = 96)]
    pub precision: u32,
    /// Refuse grids with more points than this
    #[arg(long, default_value_t = 64)]
    pub max_runs: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn parse_reading(s: &str) -> anyhow::Result<ThresholdReading> {
    ThresholdReading::BOTH
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| {
            usage(format!(
                "--reading must be unconditional or conditional, got {s:?}"
            ))
        })
}

struct Row {
    params: PaperParams,
    p: String,
    p_value: f64,
    err: f64,
    r: String,
    b: String,
    w: String,
}

pub fn run(a: SweepArgs) -> anyhow::Result<bool> {
    let src = a.source.load_or_default()?;
    let base = src.params().cloned().ok_or_else(|| {
        usage(format!(
            "{}: sweep needs a parameter-form schedule",
            src.label
        ))
    })?;
    let ctx = precision(a.precision)?;
    let reading = parse_reading(&a.reading)?;
    let axis = |flag: &str, given: &Option<String>, default: &Prob| -> anyhow::Result<Vec<Prob>> {
        match given {
            Some(text) => list(flag, text, parse_prob),
            None => Ok(vec![default.clone()]),
        }
    };
    let p0s = axis("--p0", &a.p0, &base.p0)?;
    let prs = axis("--pr", &a.p_red, &base.p_red)?;
    let pbs = axis("--pb", &a.p_blue, &base.p_blue)?;
    let prbs = axis("--prb", &a.p_mixed, &base.p_mixed)?;
    let size = p0s.len() * prs.len() * pbs.len() * prbs.len();
    if size == 0 {
        return Err(usage("the parameter grid is empty"));
    }
    if size > a.max_runs {
        return Err(usage(format!(
            "grid has {size} points, more than --max-runs {}",
            a.max_runs
        )));
    }
    if let Some(t) = a.theta {
        if !(t > 0.0 && t <= 1.0) {
            return Err(usage(format!("--theta must be in (0, 1], got {t}")));
        }
    }
    let mut grid = Vec::with_capacity(size);
    for p0 in &p0s {
        for pr in &prs {
            for pb in &pbs {
                for prb in &prbs {
                    let p = PaperParams {
                        p0: p0.clone(),
                        p_red: pr.clone(),
                        p_blue: pb.clone(),
                        p_mixed: prb.clone(),
                        phase1_rounds: a.k1.unwrap_or(base.phase1_rounds),
                        phase2_rounds: a.k2.unwrap_or(base.phase2_rounds),
                    };
                    p.validate().map_err(|e| usage(e.to_string()))?;
                    grid.push(p);
                }
            }
        }
    }

    let mut rows = grid
        .into_par_iter()
        .map(|mut params| -> anyhow::Result<Row> {
            if let Some(theta) = a.theta {
                let c = phase_calibration(&params, theta, theta, a.k_max, reading, ctx)?;
                params = params.with_phases(c.phase1_rounds, c.phase2_rounds);
            }
            let sol = solve(
                &params.build(),
                ctx,
                &SolveOptions::every(u32::MAX),
                &mut NullSink,
            )?;
            let f = &sol.final_state;
            Ok(Row {
                p: f.p.to_string_digits(DIGITS),
                p_value: f.p.to_f64(),
                err: f.p.err(),
                r: f.r.to_string_digits(DIGITS),
                b: f.b.to_string_digits(DIGITS),
                w: f.w.to_string_digits(DIGITS),
                params,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    // stable, so equal values keep grid order
    rows.sort_by(|x, y| y.p_value.total_cmp(&x.p_value));

    let mut out = output(a.out.as_deref())?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in &rows {
        let p = &r.params;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:e},{},{},{}",
            format_prob(&p.p0),
            format_prob(&p.p_red),
            format_prob(&p.p_blue),
            format_prob(&p.p_mixed),
            p.phase1_rounds,
            p.phase2_rounds,
            r.p,
            r.err,
            r.r,
            r.b,
            r.w
        )?;
    }
    out.flush()?;
    Ok(true)
}
