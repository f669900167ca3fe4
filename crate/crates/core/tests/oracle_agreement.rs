use girthcut_core::numerics::PrecisionContext;
use girthcut_core::oracle::{compare, exact_small_k};
use girthcut_core::recurrence::{solve, SolveOptions, StateVector};
use girthcut_core::schedule::{parse_prob, Category, PaperParams, Schedule};
use rug::Rational;

fn q(s: &str) -> Rational {
    parse_prob(s).unwrap()
}

fn small_schedule() -> Schedule {
    PaperParams {
        p0: q("1/4"),
        p_red: q("1/2"),
        p_blue: q("1"),
        p_mixed: q("0"),
        ..PaperParams::paper_defaults()
    }
    .with_phases(1, 0)
    .build()
}

// Frozen from fixtures/bruteforce_k2.py (plain itertools enumeration).
const P2: &str = "9907/32768";
const R2: &str = "121/512";
const B2: &str = "323/1024";
const W2: &str = "459/1024";
const WCOND2: [&str; 10] = [
    "3993/17408",
    "19965/69632",
    "7623/69632",
    "23969/139264",
    "30459/278528",
    "4851/278528",
    "46007/1114112",
    "22421/1114112",
    "14703/1114112",
    "1029/1114112",
];

#[test]
fn oracle_matches_brute_force() {
    let o = exact_small_k(&small_schedule(), 2).unwrap();
    assert_eq!(o.p, q(P2));
    assert_eq!(o.r, q(R2));
    assert_eq!(o.b, q(B2));
    assert_eq!(o.w, q(W2));
    let wcond = o.wcond.unwrap();
    for (i, s) in WCOND2.iter().enumerate() {
        assert_eq!(wcond[i], q(s), "{}", Category::ALL[i]);
    }
}

#[test]
fn solver_matches_oracle_on_fixture() {
    let s = small_schedule();
    let mut rows: Vec<StateVector> = Vec::new();
    solve(
        &s,
        PrecisionContext::certified(),
        &SolveOptions::every(1),
        &mut rows,
    )
    .unwrap();
    for st in &rows {
        let cmp = compare(&exact_small_k(&s, st.k).unwrap(), st).unwrap();
        assert!(cmp.all_ok(), "{cmp:#?}");
        assert!(cmp.max_deviation() <= 1e-12);
    }
}
