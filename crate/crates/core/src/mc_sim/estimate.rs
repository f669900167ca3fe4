use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{extract_cut, gen_cubic, run_with, CutPolicy, Engine, SimError, SimOptions};
use crate::schedule::Schedule;

pub const REPORT_HEADER: &str =
    "seed,n,red_blue_edges,final_cut_size,per_edge_fraction,per_vertex_fraction,white_residual";

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub n: u64,
    pub samples: u32,
    /// Sample `i` uses seed `seed + i` for both its graph and its run.
    pub seed: u64,
    pub engine: Engine,
    pub policy: CutPolicy,
}

/// One simulated graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub seed: u64,
    pub n: u64,
    pub red_blue_edges: u64,
    pub final_cut_size: u64,
    pub per_edge_fraction: f64,
    pub per_vertex_fraction: f64,
    pub white_residual: u64,
    /// Fractions of vertices colored red, blue, white.
    pub red_fraction: f64,
    pub blue_fraction: f64,
    pub white_fraction: f64,
}

/// Mean, sample standard deviation and 99% t-interval for the mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
    pub std_error: f64,
    /// `None` with fewer than two samples.
    pub ci99: Option<(f64, f64)>,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        if xs.len() < 2 {
            return Stat {
                mean,
                sd: f64::NAN,
                std_error: f64::NAN,
                ci99: None,
            };
        }
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        let std_error = sd / k.sqrt();
        let t = StudentsT::new(0.0, 1.0, k - 1.0)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.995);
        Stat {
            mean,
            sd,
            std_error,
            ci99: Some((mean - t * std_error, mean + t * std_error)),
        }
    }

    /// `|mean - x|` in standard errors.
    pub fn z(&self, x: f64) -> f64 {
        (self.mean - x).abs() / self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub samples: u32,
    pub per_edge_fraction: Stat,
    pub per_vertex_fraction: Stat,
    pub red_fraction: Stat,
    pub blue_fraction: Stat,
    pub white_fraction: Stat,
}

/// Simulates `opts.samples` independent random graphs in parallel. Rows come
/// back in seed order.
pub fn estimate(
    schedule: &Schedule,
    opts: &EstimateOptions,
) -> Result<(Vec<SampleRow>, Summary), SimError> {
    if opts.n < 4 || opts.n % 2 != 0 {
        return Err(SimError::OddOrSmall(opts.n));
    }
    let sim = SimOptions {
        engine: opts.engine,
        check_invariants: false,
    };
    let rows = (0..opts.samples as u64)
        .into_par_iter()
        .map(|i| {
            let seed = opts.seed.wrapping_add(i);
            let g = gen_cubic(opts.n, seed)?;
            let st = run_with(&g, schedule, seed, sim)?;
            let cut = extract_cut(&g, &st, opts.policy);
            let (red, blue, white) = st.color_counts();
            let n = opts.n as f64;
            Ok(SampleRow {
                seed,
                n: opts.n,
                red_blue_edges: cut.red_blue_edges,
                final_cut_size: cut.final_cut_size,
                per_edge_fraction: cut.per_edge_fraction,
                per_vertex_fraction: cut.per_vertex_fraction,
                white_residual: cut.white_residual,
                red_fraction: red as f64 / n,
                blue_fraction: blue as f64 / n,
                white_fraction: white as f64 / n,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let col = |f: fn(&SampleRow) -> f64| Stat::of(&rows.iter().map(f).collect::<Vec<_>>());
    let summary = Summary {
        samples: opts.samples,
        per_edge_fraction: col(|r| r.per_edge_fraction),
        per_vertex_fraction: col(|r| r.per_vertex_fraction),
        red_fraction: col(|r| r.red_fraction),
        blue_fraction: col(|r| r.blue_fraction),
        white_fraction: col(|r| r.white_fraction),
    };
    Ok((rows, summary))
}

pub fn write_report<W: Write>(mut out: W, rows: &[SampleRow]) -> io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.seed,
            r.n,
            r.red_blue_edges,
            r.final_cut_size,
            r.per_edge_fraction,
            r.per_vertex_fraction,
            r.white_residual
        )?;
    }
    Ok(())
}
