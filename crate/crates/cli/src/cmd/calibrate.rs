use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use girthcut_core::recurrence::{phase_calibration, Calibration, ThresholdReading};
use rayon::prelude::*;
use serde::Serialize;

use super::sweep::parse_reading;
use crate::source::{output, precision, usage, ScheduleArgs};

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Probabilities to calibrate (parameter form; K1, K2 are ignored)
    #[command(flatten)]
    pub source: ScheduleArgs,
    /// Threshold for both phases
    #[arg(long, default_value_t = 1e-7)]
    pub theta: f64,
    /// Phase-one threshold (overrides --theta)
    #[arg(long)]
    pub theta1: Option<f64>,
    /// Phase-two threshold (overrides --theta)
    #[arg(long)]
    pub theta2: Option<f64>,
    /// unconditional, conditional or both
    #[arg(long, default_value = "both")]
    pub reading: String,
    /// Give up after this many rounds
    #[arg(long, default_value_t = 5_000_000)]
    pub k_max: u32,
    #[arg(long, default_value_t = 256)]
    pub precision: u32,
    /// Reference phase lengths to compare against, as K1,K2
    #[arg(long, value_name = "K1,K2", value_delimiter = ',')]
    pub expect: Option<Vec<u32>>,
    /// Relative tolerance for --expect
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ReadingResult {
    #[serde(flatten)]
    calibration: Calibration,
    /// Relative deviations of K1 and K2 from the expected values.
    deviation: Option<(f64, f64)>,
    within_tolerance: Option<bool>,
}

#[derive(Debug, Serialize)]
struct CalibrationReport {
    source: String,
    theta1: f64,
    theta2: f64,
    expected: Option<(u32, u32)>,
    tolerance: f64,
    readings: Vec<ReadingResult>,
    /// Readings whose K1 and K2 are both within tolerance of the expected values.
    matching: Vec<ThresholdReading>,
}

pub fn run(a: CalibrateArgs) -> anyhow::Result<bool> {
    let src = a.source.load()?;
    let params = src.params().cloned().ok_or_else(|| {
        usage(format!(
            "{}: calibrate needs a parameter-form schedule",
            src.label
        ))
    })?;
    let ctx = precision(a.precision)?;
    let readings: Vec<ThresholdReading> = match a.reading.as_str() {
        "both" => ThresholdReading::BOTH.to_vec(),
        other => vec![parse_reading(other)?],
    };
    let theta1 = a.theta1.unwrap_or(a.theta);
    let theta2 = a.theta2.unwrap_or(a.theta);
    for (flag, t) in [("theta1", theta1), ("theta2", theta2)] {
        if !(t > 0.0 && t <= 1.0) {
            return Err(usage(format!("{flag} must be in (0, 1], got {t}")));
        }
    }
    let expected = match a.expect.as_deref() {
        None => None,
        Some(&[k1, k2]) => Some((k1, k2)),
        Some(_) => return Err(usage("--expect takes two values, K1,K2")),
    };

    let results = readings
        .par_iter()
        .map(|&r| phase_calibration(&params, theta1, theta2, a.k_max, r, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let readings: Vec<ReadingResult> = results
        .into_iter()
        .map(|c| {
            let deviation = expected.map(|(e1, e2)| {
                (
                    (c.phase1_rounds as f64 - e1 as f64) / e1.max(1) as f64,
                    (c.phase2_rounds as f64 - e2 as f64) / e2.max(1) as f64,
                )
            });
            let within_tolerance =
                deviation.map(|(d1, d2)| d1.abs() <= a.tolerance && d2.abs() <= a.tolerance);
            ReadingResult {
                calibration: c,
                deviation,
                within_tolerance,
            }
        })
        .collect();
    let matching = readings
        .iter()
        .filter(|r| r.within_tolerance == Some(true))
        .map(|r| r.calibration.reading)
        .collect();
    let report = CalibrationReport {
        source: src.label.clone(),
        theta1,
        theta2,
        expected,
        tolerance: a.tolerance,
        readings,
        matching,
    };

    let mut out = output(a.out.as_deref())?;
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", to_text(&report))?;
    }
    out.flush()?;
    Ok(true)
}

fn to_text(rep: &CalibrationReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{}: theta1 = {:e}, theta2 = {:e}",
        rep.source, rep.theta1, rep.theta2
    )
    .unwrap();
    for r in &rep.readings {
        let c = &r.calibration;
        write!(
            s,
            "{:<14} K1 = {:>8}  K2 = {:>8}  (phase-one metric {:.4e}, final w {:.4e})",
            c.reading.name(),
            c.phase1_rounds,
            c.phase2_rounds,
            c.phase1_metric,
            c.final_white
        )
        .unwrap();
        if let Some((d1, d2)) = r.deviation {
            write!(s, "  deviation {:+.2}% / {:+.2}%", 100.0 * d1, 100.0 * d2).unwrap();
        }
        writeln!(s).unwrap();
    }
    if let Some((e1, e2)) = rep.expected {
        let names: Vec<&str> = rep.matching.iter().map(|r| r.name()).collect();
        writeln!(
            s,
            "expected K1 = {e1}, K2 = {e2} within {}%: {}",
            100.0 * rep.tolerance,
            if names.is_empty() {
                "no reading matches".to_string()
            } else {
                format!("matched by {}", names.join(", "))
            }
        )
        .unwrap();
    }
    s
}
