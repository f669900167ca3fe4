use serde::Serialize;

use super::{certify, init_from_rules, step, RecurrenceError, RuleScalars, StateVector};
use crate::numerics::{PrecisionContext, TrackedScalar};
use crate::schedule::{Category, PaperParams};

/// How to read "white with exactly one non-white neighbour" at the end of
/// the first phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdReading {
    /// `w_k (w_k^{0,1} + w_k^{1,0})`, a vertex-level probability.
    Unconditional,
    /// `w_k^{0,1} + w_k^{1,0}`, conditioned on the vertex being white.
    Conditional,
}

impl ThresholdReading {
    pub const BOTH: [ThresholdReading; 2] = [Self::Unconditional, Self::Conditional];

    pub fn name(self) -> &'static str {
        match self {
            Self::Unconditional => "unconditional",
            Self::Conditional => "conditional",
        }
    }
}

pub fn phase_metric(st: &StateVector, reading: ThresholdReading) -> TrackedScalar {
    let single = st.wcond(Category::new(0, 1)) + st.wcond(Category::new(1, 0));
    match reading {
        ThresholdReading::Unconditional => &st.w * &single,
        ThresholdReading::Conditional => single,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub reading: ThresholdReading,
    pub phase1_rounds: u32,
    pub phase2_rounds: u32,
    /// Phase-one metric at round `K1 + 1`.
    pub phase1_metric: f64,
    /// `w_K` at the final round.
    pub final_white: f64,
}

impl Calibration {
    pub fn rounds(&self) -> u32 {
        self.phase1_rounds + self.phase2_rounds + 1
    }
}

/// Finds the phase lengths for `params` (whose own `K1`, `K2` are ignored).
///
/// `K1` is the least number of first-phase rounds after which the phase
/// metric drops below `theta1`; `K2` is the least number of further
/// second-phase rounds after which `w` drops below `theta2`. Both are at
/// least 1, and the total number of rounds may not exceed `k_max`.
pub fn phase_calibration(
    params: &PaperParams,
    theta1: f64,
    theta2: f64,
    k_max: u32,
    reading: ThresholdReading,
    ctx: PrecisionContext,
) -> Result<Calibration, RecurrenceError> {
    params.validate()?;
    for (name, theta) in [("theta1", theta1), ("theta2", theta2)] {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(RecurrenceError::InvalidSchedule(format!(
                "{name} = {theta} is not in (0, 1]"
            )));
        }
    }
    let mut state = init_from_rules(&RuleScalars::new(&params.seeding_rules(), ctx), ctx);
    certify(&state, false)?;

    let phase1 = RuleScalars::new(&params.phase_rules(false), ctx);
    let mut k1 = 0;
    let phase1_metric = loop {
        if state.k >= k_max {
            let last = phase_metric(&state, reading).to_f64();
            return Err(RecurrenceError::CalibrationNotReached {
                phase: "phase-1",
                rounds: k_max,
                last,
            });
        }
        state = step(&state, &phase1)?;
        k1 += 1;
        let m = phase_metric(&state, reading).to_f64();
        if m < theta1 {
            break m;
        }
    };

    let phase2 = RuleScalars::new(&params.phase_rules(true), ctx);
    let mut k2 = 0;
    let final_white = loop {
        if state.k >= k_max {
            let last = state.w.to_f64();
            return Err(RecurrenceError::CalibrationNotReached {
                phase: "phase-2",
                rounds: k_max,
                last,
            });
        }
        state = step(&state, &phase2)?;
        k2 += 1;
        let w = state.w.to_f64();
        if w < theta2 {
            break w;
        }
    };
    Ok(Calibration {
        reading,
        phase1_rounds: k1,
        phase2_rounds: k2,
        phase1_metric,
        final_white,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_threshold_gives_one_round() {
        let c = phase_calibration(
            &PaperParams::paper_defaults(),
            1.0,
            1.0,
            10,
            ThresholdReading::Unconditional,
            PrecisionContext::quick(),
        )
        .unwrap();
        assert_eq!((c.phase1_rounds, c.phase2_rounds), (1, 1));
        assert_eq!(c.rounds(), 3);
    }

    #[test]
    fn unreachable_threshold_is_an_error() {
        let err = phase_calibration(
            &PaperParams::paper_defaults(),
            1e-7,
            1e-7,
            50,
            ThresholdReading::Conditional,
            PrecisionContext::quick(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            RecurrenceError::CalibrationNotReached {
                phase: "phase-1",
                rounds: 50,
                ..
            }
        ));
    }

    #[test]
    fn rejects_bad_thresholds() {
        let p = PaperParams::paper_defaults();
        assert!(phase_calibration(
            &p,
            0.0,
            0.5,
            10,
            ThresholdReading::Conditional,
            PrecisionContext::quick()
        )
        .is_err());
    }
}
