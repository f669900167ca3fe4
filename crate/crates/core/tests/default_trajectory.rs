//! The default schedule's trajectory, frozen at 512 bits with 20 significant
//! digits, against a fresh 256-bit solve of the first phase.

use girthcut_core::numerics::PrecisionContext;
use girthcut_core::recurrence::{solve, SolveOptions, StateVector, TRAJECTORY_HEADER};
use girthcut_core::schedule::{parse_prob, PaperParams};
use rug::Rational;

const FIXTURE: &str = include_str!("../fixtures/default_trajectory.csv");

/// Slack for the 20-digit rounding of the frozen values.
const PRINT_SLACK: f64 = 1e-20;

fn frozen_rows() -> Vec<(u32, Vec<Rational>)> {
    let mut lines = FIXTURE.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            let k = cols[0].parse().unwrap();
            let vals = cols[1..cols.len() - 1]
                .iter()
                .map(|c| parse_prob(c).unwrap())
                .collect();
            (k, vals)
        })
        .collect()
}

fn check(st: &StateVector, frozen: &[Rational]) {
    let fields = st.fields();
    assert_eq!(fields.len(), frozen.len());
    for ((name, x), want) in fields.into_iter().zip(frozen) {
        let got = x.value().to_rational().unwrap();
        let diff = Rational::from(&got - want).abs().to_f64();
        assert!(
            diff <= x.err() + PRINT_SLACK,
            "round {} {name}: off by {diff:e}, err {:e}",
            st.k,
            x.err()
        );
    }
}

#[test]
fn first_phase_matches_frozen_rows() {
    let k1 = PaperParams::DEFAULT_PHASE1_ROUNDS;
    let s = PaperParams::paper_defaults().build().truncated(k1 + 1);
    let mut rows: Vec<StateVector> = Vec::new();
    solve(
        &s,
        PrecisionContext::certified(),
        &SolveOptions::every(1000).with_round(k1 + 1),
        &mut rows,
    )
    .unwrap();
    let frozen = frozen_rows();
    let mut checked = 0;
    for st in &rows {
        let (_, vals) = frozen
            .iter()
            .find(|(k, _)| *k == st.k)
            .expect("row in fixture");
        check(st, vals);
        checked += 1;
    }
    assert_eq!(checked, 36);
    assert_eq!(rows.last().unwrap().k, k1 + 1);
}

#[test]
fn fixture_covers_whole_run() {
    let frozen = frozen_rows();
    let ks: Vec<u32> = frozen.iter().map(|(k, _)| *k).collect();
    assert_eq!(ks.first(), Some(&1));
    assert_eq!(ks.last(), Some(&PaperParams::paper_defaults().rounds()));
    assert!(ks.contains(&(PaperParams::DEFAULT_PHASE1_ROUNDS + 1)));
    assert!(ks.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn schedule_fixtures_parse() {
    use girthcut_core::schedule::{parse_file, ScheduleFile};
    let load = |text: &str| match parse_file(text).unwrap() {
        ScheduleFile::Params(p) => p,
        ScheduleFile::Explicit(_) => panic!("expected the parameter form"),
    };
    assert_eq!(
        load(include_str!("../fixtures/defaults.cfg")),
        PaperParams::paper_defaults()
    );
    let tripled = load(include_str!("../fixtures/triple_mixed.cfg"));
    assert_eq!(
        tripled.p_mixed,
        PaperParams::paper_defaults().p_mixed * Rational::from(3)
    );
    let fast = load(include_str!("../fixtures/fast.cfg"));
    assert_eq!((fast.phase1_rounds, fast.phase2_rounds), (315, 2135));
}
