//! Exact round-by-round probabilities for the first two rounds, by brute-force
//! enumeration over a finite tree neighbourhood.
//!
//! Nothing here relies on the independence structure used by the
//! recurrence: every vertex of the ball draws its own decisions and all joint
//! outcomes are summed with exact rational weights.

use rug::Rational;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::TrackedScalar;
use crate::recurrence::StateVector;
use crate::schedule::{Category, RuleTable, Schedule, ScheduleError};

/// Slack added to the solver's own bound when comparing.
pub const COMPARE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exact enumeration is limited to k <= 2 (got k = {0})")]
    Unsupported(u32),
    #[error("k must be at least 1")]
    ZeroRound,
    #[error("radius {radius} is too small for round {k} (need at least {need})")]
    RadiusTooSmall { k: u32, radius: u32, need: u32 },
    #[error("radius {0} is larger than the enumeration supports")]
    RadiusTooLarge(u32),
    #[error("schedule has {rounds} rounds, cannot evaluate round {k}")]
    ScheduleTooShort { k: u32, rounds: u32 },
    #[error("oracle is at round {oracle}, state at round {state}")]
    RoundMismatch { oracle: u32, state: u32 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Exact values after round `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub k: u32,
    pub p: Rational,
    pub r: Rational,
    pub b: Rational,
    pub w: Rational,
    /// Category distribution of a white vertex; `None` when `w = 0`.
    pub wcond: Option<[Rational; 10]>,
}

/// A tree neighbourhood of a vertex or an edge in an infinite cubic tree.
#[derive(Debug, Clone)]
pub struct LocalBall {
    depth: Vec<u32>,
    neighbours: Vec<Vec<usize>>,
    radius: u32,
}

impl LocalBall {
    /// All vertices within distance `radius` of a centre vertex (index 0).
    pub fn around_vertex(radius: u32) -> Self {
        let mut ball = Self {
            depth: vec![0],
            neighbours: vec![Vec::new()],
            radius,
        };
        ball.grow(0, 3);
        ball
    }

    /// All vertices within distance `radius` of either endpoint of an edge
    /// (endpoints are indices 0 and 1).
    pub fn around_edge(radius: u32) -> Self {
        let mut ball = Self {
            depth: vec![0, 0],
            neighbours: vec![vec![1], vec![0]],
            radius,
        };
        ball.grow(0, 2);
        ball.grow(1, 2);
        ball
    }

    fn grow(&mut self, v: usize, children: usize) {
        if self.depth[v] == self.radius {
            return;
        }
        for _ in 0..children {
            let c = self.depth.len();
            self.depth.push(self.depth[v] + 1);
            self.neighbours.push(vec![v]);
            self.neighbours[v].push(c);
            self.grow(c, 2);
        }
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[v]
    }

    /// Interior vertices have degree 3; leaves (at full radius) have degree 1.
    pub fn is_interior(&self, v: usize) -> bool {
        self.depth[v] < self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Red,
    Blue,
}

const COLORS: [Color; 3] = [Color::White, Color::Red, Color::Blue];

fn category(ball: &LocalBall, colors: &[Color], v: usize) -> Category {
    let (mut r, mut b) = (0, 0);
    for &u in ball.neighbours(v) {
        match colors[u] {
            Color::Red => r += 1,
            Color::Blue => b += 1,
            Color::White => {}
        }
    }
    Category::new(r, b)
}

fn outcome_prob(table: &RuleTable, c: Category, color: Color) -> Rational {
    let rule = table.get(c);
    match color {
        Color::White => rule.white(),
        Color::Red => rule.red.clone(),
        Color::Blue => rule.blue.clone(),
    }
}

/// Calls `visit(colors, weight)` for every joint outcome of rounds `1..=k`
/// with positive probability. Round `j` decisions are drawn for the vertices
/// at depth `<= radius + 1 - j`, whose neighbourhoods are fully inside the ball.
fn enumerate(ball: &LocalBall, tables: &[&RuleTable], visit: &mut dyn FnMut(&[Color], &Rational)) {
    let mut colors = vec![Color::White; ball.len()];
    let one = Rational::from(1);
    round(ball, tables, 0, &mut colors, &one, visit);
}

fn round(
    ball: &LocalBall,
    tables: &[&RuleTable],
    j: usize,
    colors: &mut Vec<Color>,
    weight: &Rational,
    visit: &mut dyn FnMut(&[Color], &Rational),
) {
    if j == tables.len() {
        visit(colors, weight);
        return;
    }
    let movers: Vec<usize> = (0..ball.len())
        .filter(|&v| colors[v] == Color::White && ball.depth(v) + j as u32 <= ball.radius)
        .collect();
    // categories are frozen at the start of the round
    let cats: Vec<Category> = movers.iter().map(|&v| category(ball, colors, v)).collect();
    decide(ball, tables, j, &movers, &cats, 0, colors, weight, visit);
}

#[allow(clippy::too_many_arguments)]
fn decide(
    ball: &LocalBall,
    tables: &[&RuleTable],
    j: usize,
    movers: &[usize],
    cats: &[Category],
    i: usize,
    colors: &mut Vec<Color>,
    weight: &Rational,
    visit: &mut dyn FnMut(&[Color], &Rational),
) {
    if i == movers.len() {
        round(ball, tables, j + 1, colors, weight, visit);
        return;
    }
    let v = movers[i];
    for color in COLORS {
        let prob = outcome_prob(tables[j], cats[i], color);
        if prob == 0 {
            continue;
        }
        colors[v] = color;
        let w = Rational::from(weight * &prob);
        decide(ball, tables, j, movers, cats, i + 1, colors, &w, visit);
    }
    colors[v] = Color::White;
}

/// Exact values after round `k` using the smallest sufficient balls.
pub fn exact_small_k(schedule: &Schedule, k: u32) -> Result<OracleResult, OracleError> {
    exact_with_radius(schedule, k, k)
}

/// Like [`exact_small_k`] with a vertex ball of radius `radius` (the edge
/// ball has radius `radius - 1`). Larger balls must not change the result.
pub fn exact_with_radius(
    schedule: &Schedule,
    k: u32,
    radius: u32,
) -> Result<OracleResult, OracleError> {
    if k == 0 {
        return Err(OracleError::ZeroRound);
    }
    if k > 2 {
        return Err(OracleError::Unsupported(k));
    }
    if radius < k {
        return Err(OracleError::RadiusTooSmall { k, radius, need: k });
    }
    if radius > 2 {
        return Err(OracleError::RadiusTooLarge(radius));
    }
    if schedule.rounds() < k {
        return Err(OracleError::ScheduleTooShort {
            k,
            rounds: schedule.rounds(),
        });
    }
    let tables: Vec<&RuleTable> = (1..=k)
        .map(|j| schedule.table_at(j))
        .collect::<Result<_, _>>()?;

    let mut r = Rational::new();
    let mut b = Rational::new();
    let mut w = Rational::new();
    let mut white_in: [Rational; 10] = Default::default();
    let ball = LocalBall::around_vertex(radius);
    enumerate(&ball, &tables, &mut |colors, weight| match colors[0] {
        Color::Red => r += weight,
        Color::Blue => b += weight,
        Color::White => {
            w += weight;
            white_in[category(&ball, colors, 0).index()] += weight;
        }
    });

    let mut p = Rational::new();
    let edge = LocalBall::around_edge(radius - 1);
    enumerate(&edge, &tables, &mut |colors, weight| {
        if matches!(
            (colors[0], colors[1]),
            (Color::Red, Color::Blue) | (Color::Blue, Color::Red)
        ) {
            p += weight;
        }
    });

    let wcond = (w != 0).then(|| std::array::from_fn(|i| Rational::from(&white_in[i] / &w)));
    Ok(OracleResult {
        k,
        p,
        r,
        b,
        w,
        wcond,
    })
}

/// Deviation of one solver field from the exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldDeviation {
    pub field: String,
    pub exact: f64,
    pub solver: f64,
    pub deviation: f64,
    pub solver_err: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub k: u32,
    pub fields: Vec<FieldDeviation>,
}

impl Comparison {
    pub fn max_deviation(&self) -> f64 {
        self.fields.iter().map(|f| f.deviation).fold(0.0, f64::max)
    }

    pub fn all_ok(&self) -> bool {
        self.fields.iter().all(|f| f.ok)
    }
}

fn deviation(field: &str, exact: &Rational, x: &TrackedScalar) -> FieldDeviation {
    let value = x.value().to_rational().expect("finite solver value");
    let diff = Rational::from(&value - exact).abs();
    // round the deviation up so `ok` is never too generous
    let deviation = {
        let d = diff.to_f64();
        if Rational::from_f64(d).is_some_and(|q| q >= diff) {
            d
        } else {
            d.next_up()
        }
    };
    FieldDeviation {
        field: field.to_string(),
        exact: exact.to_f64(),
        solver: x.to_f64(),
        deviation,
        solver_err: x.err(),
        ok: deviation <= x.err() + COMPARE_SLACK,
    }
}

/// Field-by-field comparison of exact and solver values. Category
/// probabilities are only compared when the exact white probability is positive.
pub fn compare(oracle: &OracleResult, st: &StateVector) -> Result<Comparison, OracleError> {
    if oracle.k != st.k {
        return Err(OracleError::RoundMismatch {
            oracle: oracle.k,
            state: st.k,
        });
    }
    let mut fields = vec![
        deviation("p", &oracle.p, &st.p),
        deviation("r", &oracle.r, &st.r),
        deviation("b", &oracle.b, &st.b),
        deviation("w", &oracle.w, &st.w),
    ];
    if let Some(wcond) = &oracle.wcond {
        for c in Category::ALL {
            fields.push(deviation(&c.label(), &wcond[c.index()], st.wcond(c)));
        }
    }
    Ok(Comparison {
        k: oracle.k,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionContext;
    use crate::recurrence::{init_round, step, RuleScalars};
    use crate::schedule::{parse_prob, PaperParams, Segment};

    fn q(s: &str) -> Rational {
        parse_prob(s).unwrap()
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(LocalBall::around_vertex(1).len(), 4);
        assert_eq!(LocalBall::around_vertex(2).len(), 10);
        assert_eq!(LocalBall::around_vertex(3).len(), 22);
        assert_eq!(LocalBall::around_edge(0).len(), 2);
        assert_eq!(LocalBall::around_edge(1).len(), 6);
        let ball = LocalBall::around_vertex(2);
        for v in 0..ball.len() {
            let deg = ball.neighbours(v).len();
            assert_eq!(deg, if ball.is_interior(v) { 3 } else { 1 });
        }
    }

    #[test]
    fn first_round_closed_form() {
        let s = PaperParams::paper_defaults().build();
        let o = exact_small_k(&s, 1).unwrap();
        assert_eq!(o.p, q("2^-37"));
        assert_eq!(o.r, q("2^-19"));
        let total: Rational = o.wcond.as_ref().unwrap().iter().sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn fair_first_round_leaves_nothing_white() {
        let t = RuleTable::inert().with(Category::new(0, 0), q("1/2"), q("1/2"));
        let s = Schedule::new(
            2,
            vec![
                Segment::new(1, 1, t),
                Segment::new(2, 2, RuleTable::inert()),
            ],
        );
        let o = exact_small_k(&s, 2).unwrap();
        assert_eq!(o.p, q("1/2"));
        assert_eq!(o.w, 0);
        assert!(o.wcond.is_none());
    }

    #[test]
    fn larger_ball_changes_nothing() {
        let s = PaperParams {
            p0: q("1/4"),
            p_red: q("1/2"),
            p_blue: q("1"),
            p_mixed: q("0"),
            ..PaperParams::paper_defaults()
        }
        .with_phases(1, 0)
        .build();
        assert_eq!(
            exact_with_radius(&s, 1, 1).unwrap(),
            exact_with_radius(&s, 1, 2).unwrap()
        );
    }

    #[test]
    fn rejects_unsupported_rounds() {
        let s = Schedule::inert(3);
        assert_eq!(exact_small_k(&s, 3), Err(OracleError::Unsupported(3)));
        assert_eq!(exact_small_k(&s, 0), Err(OracleError::ZeroRound));
        assert!(matches!(
            exact_with_radius(&s, 2, 1),
            Err(OracleError::RadiusTooSmall { .. })
        ));
        assert!(matches!(
            exact_small_k(&Schedule::inert(1), 2),
            Err(OracleError::ScheduleTooShort { .. })
        ));
    }

    #[test]
    fn compare_inert_is_exact() {
        let s = Schedule::inert(2);
        let ctx = PrecisionContext::certified();
        let st = init_round(&s, ctx).unwrap();
        let cmp = compare(&exact_small_k(&s, 1).unwrap(), &st).unwrap();
        assert_eq!(cmp.max_deviation(), 0.0);
        assert!(cmp.all_ok());

        let st2 = step(&st, &RuleScalars::new(s.table_at(2).unwrap(), ctx)).unwrap();
        assert!(matches!(
            compare(&exact_small_k(&s, 1).unwrap(), &st2),
            Err(OracleError::RoundMismatch {
                oracle: 1,
                state: 2
            })
        ));
    }
}
