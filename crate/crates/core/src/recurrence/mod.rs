//! Round-by-round evolution of the analytic state of the coloring procedure.
//!
//! The state after round `k` consists of the probabilities that a vertex is
//! white, red or blue, the probability `p` that an edge is red-blue, and the
//! distribution of a white vertex over the ten neighbour categories. On
//! cubic graphs of girth at least `2K + 1` these quantities do not depend on
//! the chosen vertex or edge and evolve by the closed recurrences below.
//!
//! All arithmetic goes through [`TrackedScalar`], so every reported value
//! carries a rigorous rounding-error bound. Sums are taken in sorted order;
//! together with the symmetric form of every term this makes the solver
//! exactly equivariant under exchanging red and blue.

mod calibrate;
mod trajectory;

use rug::float::Round;
use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{sum_sorted, NumericsError, PrecisionContext, TrackedScalar};
use crate::schedule::{Category, RuleTable, Schedule, ScheduleError};

pub use calibrate::{phase_calibration, phase_metric, Calibration, ThresholdReading};
pub use trajectory::{CsvTrajectory, FnSink, NullSink, TrajectorySink, TRAJECTORY_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecurrenceError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("schedule is invalid: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("certification failed after round {round}: {detail}")]
    Certification { round: u32, detail: String },
    #[error("p_K - err = {lower:e} is not positive; no bound can be derived")]
    NonPositiveCut { lower: f64 },
    #[error("state is at round {state_round}, expected {expected}")]
    RoundMismatch { state_round: u32, expected: u32 },
    #[error("{phase} threshold not reached within {rounds} rounds (last value {last:e})")]
    CalibrationNotReached {
        phase: &'static str,
        rounds: u32,
        last: f64,
    },
    #[error("trajectory sink: {0}")]
    Sink(String),
}

/// Analytic state after round `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub k: u32,
    pub w: TrackedScalar,
    pub r: TrackedScalar,
    pub b: TrackedScalar,
    pub p: TrackedScalar,
    /// Category distribution of a white vertex, indexed by [`Category::index`].
    pub wcond: [TrackedScalar; 10],
    /// Probability of being white and in each category, `w * wcond`.
    pub joint: [TrackedScalar; 10],
}

impl StateVector {
    pub fn wcond(&self, c: Category) -> &TrackedScalar {
        &self.wcond[c.index()]
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.p.ctx()
    }

    /// The same state with red and blue exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            k: self.k,
            w: self.w.clone(),
            r: self.b.clone(),
            b: self.r.clone(),
            p: self.p.clone(),
            wcond: std::array::from_fn(|i| self.wcond(Category::ALL[i].transpose()).clone()),
            joint: std::array::from_fn(|i| {
                self.joint[Category::ALL[i].transpose().index()].clone()
            }),
        }
    }

    /// `r + b + w`, with its bound.
    pub fn color_total(&self) -> TrackedScalar {
        let rb = &self.r + &self.b;
        &rb + &self.w
    }

    pub fn wcond_total(&self) -> TrackedScalar {
        sum_sorted(self.wcond.to_vec(), self.ctx())
    }

    /// Named scalar fields in trajectory column order.
    pub fn fields(&self) -> Vec<(String, &TrackedScalar)> {
        let mut out = vec![
            ("p".to_string(), &self.p),
            ("r".to_string(), &self.r),
            ("b".to_string(), &self.b),
            ("w".to_string(), &self.w),
        ];
        for c in Category::ALL {
            out.push((c.label(), self.wcond(c)));
        }
        out
    }
}

/// Per-round auxiliary quantities derived from the category distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxQuantities {
    /// Probability of staying white given white.
    pub w_to: TrackedScalar,
    /// Probability that a fixed neighbour of a white vertex is white.
    pub q_ww: TrackedScalar,
    /// New color of a white neighbour across a white-white edge.
    pub q_red: TrackedScalar,
    pub q_blue: TrackedScalar,
    pub q_white: TrackedScalar,
    /// The white-white probability was indistinguishable from zero and the
    /// `q` values were frozen at `(0, 0, 1)`.
    pub q_frozen: bool,
}

/// A rule table converted to tracked scalars at one precision.
#[derive(Debug, Clone)]
pub struct RuleScalars {
    pub white: [TrackedScalar; 10],
    pub red: [TrackedScalar; 10],
    pub blue: [TrackedScalar; 10],
}

impl RuleScalars {
    pub fn new(table: &RuleTable, ctx: PrecisionContext) -> Self {
        let conv = |f: &dyn Fn(Category) -> rug::Rational| -> [TrackedScalar; 10] {
            std::array::from_fn(|i| TrackedScalar::from_rational(&f(Category::ALL[i]), ctx))
        };
        Self {
            white: conv(&|c| table.get(c).white()),
            red: conv(&|c| table.get(c).red.clone()),
            blue: conv(&|c| table.get(c).blue.clone()),
        }
    }
}

/// Conservative corollaries of a final state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedBounds {
    /// `p_K` (nearest `f64`).
    pub per_edge_prob: f64,
    pub per_edge_err: f64,
    /// `p_K - err`, rounded down.
    pub per_edge_lower: f64,
    /// Lower bound on the expected cut size per vertex, `1.5 (p_K - err)`.
    pub cut_per_vertex: f64,
    /// Upper bound on the fractional cut covering number, `1 / (p_K - err)`.
    pub frac_cover: f64,
    /// Girth needed for the analysis to apply, `2K + 1`.
    pub required_girth: u64,
}

/// Output of [`solve`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub final_state: StateVector,
    /// Fails when `p_K - err` is not positive.
    pub bounds: Result<DerivedBounds, RecurrenceError>,
    /// Rounds in which a denominator was indistinguishable from zero.
    pub degenerate_rounds: u32,
}

/// Which intermediate states [`solve`] hands to the sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Emit round 1, every round divisible by `every`, and the final round.
    /// Zero emits only the final round.
    pub every: u32,
    /// Further rounds to emit.
    pub extra_rounds: Vec<u32>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::every(100)
    }
}

impl SolveOptions {
    pub fn every(every: u32) -> Self {
        Self {
            every,
            extra_rounds: Vec::new(),
        }
    }

    pub fn with_round(mut self, k: u32) -> Self {
        self.extra_rounds.push(k);
        self
    }

    fn emits(&self, k: u32, last: u32) -> bool {
        k == last
            || (self.every > 0 && (k == 1 || k % self.every == 0))
            || self.extra_rounds.contains(&k)
    }
}

fn multinomial(n: u8, parts: &[u8]) -> u32 {
    const FACT: [u32; 4] = [1, 1, 2, 6];
    let used: u8 = parts.iter().sum();
    assert!(used <= n && n <= 3);
    FACT[n as usize]
        / parts.iter().map(|&p| FACT[p as usize]).product::<u32>()
        / FACT[(n - used) as usize]
}

fn is_exact_zero(x: &TrackedScalar) -> bool {
    x.value().is_zero() && x.err() == 0.0
}

/// Product that skips exactly-known unit factors.
fn times(a: Option<&TrackedScalar>, b: Option<&TrackedScalar>) -> Option<TrackedScalar> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => Some(x * y),
    }
}

/// `[None, x, x^2, x^3]`, `None` standing for the exact 1.
fn powers(x: &TrackedScalar) -> [Option<TrackedScalar>; 4] {
    let x2 = x * x;
    let x3 = &x2 * x;
    [None, Some(x.clone()), Some(x2), Some(x3)]
}

/// State after the seeding round.
pub fn init_round(
    schedule: &Schedule,
    ctx: PrecisionContext,
) -> Result<StateVector, RecurrenceError> {
    let rules = RuleScalars::new(schedule.table_at(1)?, ctx);
    Ok(init_from_rules(&rules, ctx))
}

pub fn init_from_rules(rules: &RuleScalars, ctx: PrecisionContext) -> StateVector {
    let origin = Category::new(0, 0).index();
    let red = &rules.red[origin];
    let blue = &rules.blue[origin];
    let stay = &rules.white[origin];
    let r = red.clone();
    let b = blue.clone();
    let w = TrackedScalar::one(ctx).sub(&(&r + &b));
    let p = (red * blue).mul_int(2);
    let (red_pow, blue_pow, stay_pow) = (powers(red), powers(blue), powers(stay));
    let wcond: [TrackedScalar; 10] = std::array::from_fn(|i| {
        let c = Category::ALL[i];
        let colored = times(
            red_pow[c.r as usize].as_ref(),
            blue_pow[c.b as usize].as_ref(),
        );
        let all = times(colored.as_ref(), stay_pow[c.whites() as usize].as_ref())
            .unwrap_or_else(|| TrackedScalar::one(ctx));
        all.mul_int(multinomial(3, &[c.r, c.b]))
    });
    let joint = std::array::from_fn(|i| {
        if stay.value() == &1 && stay.err() == 0.0 {
            wcond[i].clone()
        } else {
            stay * &wcond[i]
        }
    });
    StateVector {
        k: 1,
        w,
        r,
        b,
        p,
        wcond,
        joint,
    }
}

/// Ratio of the nominal values, `None` when the denominator's value is not positive.
fn nominal_ratio(num: &TrackedScalar, den: &TrackedScalar) -> Option<Float> {
    (*den.value() > 0)
        .then(|| Float::with_val(den.ctx().mantissa_bits(), num.value() / den.value()))
}

/// Conditional colors of a white neighbour. The flag is set when the white-white
/// incidence mass is within error of zero; the three shares then keep their
/// nominal values but only claim to lie in `[0, 1]`.
fn neighbour_colors(
    joint: &[TrackedScalar; 10],
    rules: &RuleScalars,
    ctx: PrecisionContext,
) -> ((TrackedScalar, TrackedScalar, TrackedScalar), bool) {
    // white-white incidences: sum over categories of (3 - r - b) times the mass
    let weighted: Vec<(Category, TrackedScalar)> = Category::ALL
        .iter()
        .filter(|c| c.has_white_neighbor())
        .map(|c| (*c, joint[c.index()].mul_int(c.whites() as u32)))
        .collect();
    let incidences = sum_sorted(weighted.iter().map(|(_, x)| x.clone()).collect(), ctx);
    let numerator = |probs: &[TrackedScalar; 10]| -> TrackedScalar {
        let terms: Vec<_> = weighted
            .iter()
            .map(|(c, x)| x * &probs[c.index()])
            .filter(|t| !is_exact_zero(t))
            .collect();
        sum_sorted(terms, ctx)
    };
    let (red_num, blue_num) = (numerator(&rules.red), numerator(&rules.blue));
    if let (Ok(red), Ok(blue)) = (red_num.div(&incidences), blue_num.div(&incidences)) {
        let (red, blue) = (red.clamp_unit(), blue.clamp_unit());
        // the white share is the exact complement of the other two
        let white = TrackedScalar::one(ctx).sub(&(&red + &blue)).clamp_unit();
        return ((red, blue, white), false);
    }
    let zero = || Float::with_val(ctx.mantissa_bits(), 0);
    let red = nominal_ratio(&red_num, &incidences).unwrap_or_else(zero);
    let blue = nominal_ratio(&blue_num, &incidences).unwrap_or_else(zero);
    let white = Float::with_val(
        ctx.mantissa_bits(),
        1 - Float::with_val(ctx.mantissa_bits(), &red + &blue),
    );
    let cover = |v| TrackedScalar::unit_cover(v, ctx);
    ((cover(red), cover(blue), cover(white)), true)
}

pub fn aux_quantities(st: &StateVector, rules: &RuleScalars) -> AuxQuantities {
    let ctx = st.ctx();
    let stay: Vec<_> = Category::ALL
        .iter()
        .map(|c| st.wcond(*c) * &rules.white[c.index()])
        .collect();
    let w_to = sum_sorted(stay, ctx);
    let weighted: Vec<_> = Category::ALL
        .iter()
        .filter(|c| c.has_white_neighbor())
        .map(|c| st.wcond(*c).mul_int(c.whites() as u32))
        .collect();
    let q_ww = sum_sorted(weighted, ctx).div_int(3);
    let ((q_red, q_blue, q_white), q_frozen) = neighbour_colors(&st.joint, rules, ctx);
    AuxQuantities {
        w_to,
        q_ww,
        q_red,
        q_blue,
        q_white,
        q_frozen,
    }
}

/// Outcome of one round, with flags for the degenerate-denominator fallbacks.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: StateVector,
    pub aux: AuxQuantities,
    /// `w` became indistinguishable from zero; the category distribution was carried forward.
    pub carried_forward: bool,
}

pub fn step(st: &StateVector, rules: &RuleScalars) -> Result<StateVector, RecurrenceError> {
    step_detailed(st, rules).map(|o| o.state)
}

/// One round of the recurrence.
///
/// Internally the update runs on the joint masses `w * w^{r,b}`, which turns
/// the renormalisation by `w_to` into a single division when the category
/// distribution is read off. Running error bounds then grow additively
/// instead of doubling every round.
pub fn step_detailed(
    st: &StateVector,
    rules: &RuleScalars,
) -> Result<StepOutcome, RecurrenceError> {
    let ctx = st.ctx();
    let aux = aux_quantities(st, rules);
    let one = TrackedScalar::one(ctx);

    let colored = |probs: &[TrackedScalar; 10]| -> Vec<(Category, TrackedScalar)> {
        Category::ALL
            .iter()
            .map(|c| (*c, &st.joint[c.index()] * &probs[c.index()]))
            .filter(|(_, t)| !is_exact_zero(t))
            .collect()
    };
    let to_red = colored(&rules.red);
    let to_blue = colored(&rules.blue);

    let red_gain = sum_sorted(to_red.iter().map(|(_, t)| t.clone()).collect(), ctx);
    let blue_gain = sum_sorted(to_blue.iter().map(|(_, t)| t.clone()).collect(), ctx);
    let r = (&st.r + &red_gain).clamp_unit();
    let b = (&st.b + &blue_gain).clamp_unit();
    let w = one.sub(&(&r + &b)).clamp_unit();

    // A vertex turning red makes each blue neighbour a red-blue edge, and each
    // white neighbour one if that neighbour turns blue in the same round.
    let mut edge_terms = Vec::with_capacity(to_red.len() + to_blue.len());
    for (c, t) in &to_red {
        let factor = TrackedScalar::exact_int(2 * c.b as i64, ctx)
            .add(&aux.q_blue.mul_int(c.whites() as u32));
        edge_terms.push(t * &factor);
    }
    for (c, t) in &to_blue {
        let factor = TrackedScalar::exact_int(2 * c.r as i64, ctx)
            .add(&aux.q_red.mul_int(c.whites() as u32));
        edge_terms.push(t * &factor);
    }
    let p = (&st.p + &sum_sorted(edge_terms, ctx).div_int(3)).clamp_unit();

    let joint = next_joint(st, rules, &aux).map(|x| x.clamp_unit());
    let carried_forward = w.interval_contains_zero();
    let wcond = if carried_forward {
        // nominal shares (or the previous ones if w's value vanished), claiming only [0, 1]
        std::array::from_fn(|i| {
            let v = nominal_ratio(&joint[i], &w).unwrap_or_else(|| st.wcond[i].value().clone());
            TrackedScalar::unit_cover(v, ctx)
        })
    } else {
        let mut out = Vec::with_capacity(10);
        for x in &joint {
            out.push(x.div(&w)?.clamp_unit());
        }
        out.try_into().expect("ten categories")
    };

    let state = StateVector {
        k: st.k + 1,
        w,
        r,
        b,
        p,
        wcond,
        joint,
    };
    certify(&state, carried_forward)?;
    Ok(StepOutcome {
        state,
        aux,
        carried_forward,
    })
}

fn next_joint(st: &StateVector, rules: &RuleScalars, aux: &AuxQuantities) -> [TrackedScalar; 10] {
    let ctx = st.ctx();
    let stay: Vec<TrackedScalar> = Category::ALL
        .iter()
        .map(|c| &st.joint[c.index()] * &rules.white[c.index()])
        .collect();
    let red_pow = powers(&aux.q_red);
    let blue_pow = powers(&aux.q_blue);
    let white_pow = powers(&aux.q_white);

    std::array::from_fn(|i| {
        let target = Category::ALL[i];
        let keep_white = (3 - target.r - target.b) as usize;
        let mut terms = Vec::new();
        for source in Category::ALL {
            if source.r > target.r || source.b > target.b {
                continue;
            }
            let s = &stay[source.index()];
            if is_exact_zero(s) {
                continue;
            }
            let dr = target.r - source.r;
            let db = target.b - source.b;
            // choose which white neighbours turned red and which turned blue
            let ways = multinomial(source.whites(), &[dr, db]);
            let neighbours = times(
                times(
                    red_pow[dr as usize].as_ref(),
                    blue_pow[db as usize].as_ref(),
                )
                .as_ref(),
                white_pow[keep_white].as_ref(),
            );
            let base = s.mul_int(ways);
            terms.push(match neighbours {
                Some(n) => &base * &n,
                None => base,
            });
        }
        sum_sorted(terms, ctx)
    })
}

fn certify(st: &StateVector, carried_forward: bool) -> Result<(), RecurrenceError> {
    let fail = |detail: String| RecurrenceError::Certification {
        round: st.k,
        detail,
    };
    for (name, x) in st.fields() {
        if x.upper_f64() < 0.0 || x.lower_f64() > 1.0 {
            return Err(fail(format!("{name} = {x:?} leaves [0, 1]")));
        }
    }
    if !carried_forward {
        let total = st.wcond_total();
        if total.lower_f64() > 1.0 || total.upper_f64() < 1.0 {
            return Err(fail(format!("category distribution sums to {total:?}")));
        }
    }
    Ok(())
}

/// Conservative corollaries of the final state of a `rounds`-round schedule.
pub fn derived_bounds(
    final_state: &StateVector,
    rounds: u32,
) -> Result<DerivedBounds, RecurrenceError> {
    if final_state.k != rounds {
        return Err(RecurrenceError::RoundMismatch {
            state_round: final_state.k,
            expected: rounds,
        });
    }
    let p = &final_state.p;
    let prec = p.ctx().mantissa_bits() + 64;
    let err = Float::with_val_round(prec, p.err(), Round::Up).0;
    let lower = Float::with_val_round(prec, p.value() - &err, Round::Down).0;
    if lower <= 0 {
        return Err(RecurrenceError::NonPositiveCut {
            lower: lower.to_f64(),
        });
    }
    let cut = Float::with_val_round(prec, &lower * 1.5f64, Round::Down).0;
    let cover = Float::with_val_round(prec, 1u32 / &lower, Round::Up).0;
    Ok(DerivedBounds {
        per_edge_prob: p.to_f64(),
        per_edge_err: p.err(),
        per_edge_lower: lower.to_f64_round(Round::Down),
        cut_per_vertex: cut.to_f64_round(Round::Down),
        frac_cover: cover.to_f64_round(Round::Up),
        required_girth: 2 * rounds as u64 + 1,
    })
}

/// Runs the seeding round and `K - 1` further rounds, streaming selected
/// states to `sink`.
pub fn solve(
    schedule: &Schedule,
    ctx: PrecisionContext,
    options: &SolveOptions,
    sink: &mut dyn TrajectorySink,
) -> Result<Solution, RecurrenceError> {
    let violations = schedule.validate();
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(RecurrenceError::InvalidSchedule(msgs.join("; ")));
    }
    let last = schedule.rounds();
    let tables: Vec<RuleScalars> = schedule
        .segments()
        .iter()
        .map(|s| RuleScalars::new(&s.rules, ctx))
        .collect();

    let mut state = init_from_rules(&tables[schedule.segment_index(1)?], ctx);
    certify(&state, false)?;
    let emit = |st: &StateVector, sink: &mut dyn TrajectorySink| {
        sink.record(st)
            .map_err(|e| RecurrenceError::Sink(e.to_string()))
    };
    if options.emits(1, last) {
        emit(&state, sink)?;
    }
    let mut degenerate_rounds = 0;
    for (seg, rules) in schedule.segments().iter().zip(&tables) {
        for k in seg.from.max(2)..=seg.to {
            let outcome = step_detailed(&state, rules)?;
            if outcome.carried_forward || outcome.aux.q_frozen {
                degenerate_rounds += 1;
            }
            state = outcome.state;
            debug_assert_eq!(state.k, k);
            if options.emits(k, last) {
                emit(&state, sink)?;
            }
        }
    }
    let bounds = derived_bounds(&state, last);
    Ok(Solution {
        final_state: state,
        bounds,
        degenerate_rounds,
    })
}
