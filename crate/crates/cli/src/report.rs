use std::fmt::Write as _;

use girthcut_core::numerics::TrackedScalar;
use girthcut_core::recurrence::{DerivedBounds, Solution};
use girthcut_core::schedule::{format_prob, PaperParams, Schedule};
use serde::Serialize;

pub const DIGITS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct Value {
    pub value: String,
    pub err: f64,
}

impl From<&TrackedScalar> for Value {
    fn from(x: &TrackedScalar) -> Self {
        Value {
            value: x.to_string_digits(DIGITS),
            err: x.err(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsSummary {
    pub p0: String,
    #[serde(rename = "pR")]
    pub p_red: String,
    #[serde(rename = "pB")]
    pub p_blue: String,
    #[serde(rename = "pRB")]
    pub p_mixed: String,
    #[serde(rename = "K1")]
    pub k1: u32,
    #[serde(rename = "K2")]
    pub k2: u32,
}

impl From<&PaperParams> for ParamsSummary {
    fn from(p: &PaperParams) -> Self {
        ParamsSummary {
            p0: format_prob(&p.p0),
            p_red: format_prob(&p.p_red),
            p_blue: format_prob(&p.p_blue),
            p_mixed: format_prob(&p.p_mixed),
            k1: p.phase1_rounds,
            k2: p.phase2_rounds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleSummary {
    pub source: String,
    pub rounds: u32,
    pub segments: usize,
    pub params: Option<ParamsSummary>,
}

impl ScheduleSummary {
    pub fn new(source: &str, schedule: &Schedule, params: Option<&PaperParams>) -> Self {
        ScheduleSummary {
            source: source.to_string(),
            rounds: schedule.rounds(),
            segments: schedule.segments().len(),
            params: params.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalValues {
    pub p: Value,
    pub r: Value,
    pub b: Value,
    pub w: Value,
}

/// Result of `solve`. Wall time goes to stderr only, so reruns give
/// byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schedule: ScheduleSummary,
    pub precision_bits: u32,
    #[serde(rename = "final")]
    pub final_values: FinalValues,
    pub bounds: Option<DerivedBounds>,
    pub bounds_error: Option<String>,
    pub degenerate_rounds: u32,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn new(
        schedule: ScheduleSummary,
        precision_bits: u32,
        sol: &Solution,
        wall_seconds: f64,
    ) -> Self {
        let f = &sol.final_state;
        RunReport {
            schedule,
            precision_bits,
            final_values: FinalValues {
                p: (&f.p).into(),
                r: (&f.r).into(),
                b: (&f.b).into(),
                w: (&f.w).into(),
            },
            bounds: sol.bounds.as_ref().ok().cloned(),
            bounds_error: sol.bounds.as_ref().err().map(ToString::to_string),
            degenerate_rounds: sol.degenerate_rounds,
            wall_seconds,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sch = &self.schedule;
        writeln!(
            s,
            "schedule        {} (K = {}, {} segments)",
            sch.source, sch.rounds, sch.segments
        )
        .unwrap();
        if let Some(p) = &sch.params {
            writeln!(
                s,
                "parameters      p0 = {}, pR = {}, pB = {}, pRB = {}, K1 = {}, K2 = {}",
                p.p0, p.p_red, p.p_blue, p.p_mixed, p.k1, p.k2
            )
            .unwrap();
        }
        writeln!(s, "precision       {} bits", self.precision_bits).unwrap();
        let f = &self.final_values;
        for (name, v) in [("p_K", &f.p), ("r_K", &f.r), ("b_K", &f.b), ("w_K", &f.w)] {
            writeln!(s, "{name:<15} {} ± {:.3e}", v.value, v.err).unwrap();
        }
        match (&self.bounds, &self.bounds_error) {
            (Some(b), _) => {
                writeln!(s, "p_K - err       {}", b.per_edge_lower).unwrap();
                writeln!(s, "cut per vertex  >= {}", b.cut_per_vertex).unwrap();
                writeln!(s, "frac cover      <= {}", b.frac_cover).unwrap();
                writeln!(s, "required girth  {}", b.required_girth).unwrap();
            }
            (None, Some(e)) => writeln!(s, "bounds          unavailable: {e}").unwrap(),
            (None, None) => {}
        }
        if self.degenerate_rounds > 0 {
            writeln!(
                s,
                "degenerate      {} rounds used the zero-denominator fallback",
                self.degenerate_rounds
            )
            .unwrap();
        }
        s
    }
}
