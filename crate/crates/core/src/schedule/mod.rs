//! Per-round, per-category recoloring probabilities.
//!
//! A white vertex is classified by its numbers of red and blue neighbours
//! `(r, b)` with `r + b <= 3`. For each round and category a [`RoundRule`]
//! gives the probabilities of turning red or blue; the probability of staying
//! white is always derived as `1 - red - blue`, so the three always sum to one.
//! Probabilities are exact rationals.

mod format;

use std::fmt;

use rug::Rational;
use serde::Serialize;
use thiserror::Error;

pub use format::{format_prob, parse_file, parse_prob, write_params, ScheduleFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("round {round} is outside 1..={rounds}")]
    RoundOutOfRange { round: u32, rounds: u32 },
    #[error("round {0} is not covered by any segment")]
    RoundNotCovered(u32),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Exact probability value.
pub type Prob = Rational;

/// Category of a white vertex: numbers of red and blue neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Category {
    pub r: u8,
    pub b: u8,
}

impl Category {
    /// All ten categories of a cubic graph, in the canonical column order
    /// `00, 01, 10, 11, 02, 20, 12, 21, 03, 30`. Transposed pairs are adjacent.
    pub const ALL: [Category; 10] = [
        Category::new(0, 0),
        Category::new(0, 1),
        Category::new(1, 0),
        Category::new(1, 1),
        Category::new(0, 2),
        Category::new(2, 0),
        Category::new(1, 2),
        Category::new(2, 1),
        Category::new(0, 3),
        Category::new(3, 0),
    ];

    pub const fn new(r: u8, b: u8) -> Self {
        Self { r, b }
    }

    pub fn checked(r: u8, b: u8) -> Option<Self> {
        (r as u16 + b as u16 <= 3).then_some(Self { r, b })
    }

    /// Position in [`Category::ALL`].
    pub fn index(self) -> usize {
        match (self.r, self.b) {
            (0, 0) => 0,
            (0, 1) => 1,
            (1, 0) => 2,
            (1, 1) => 3,
            (0, 2) => 4,
            (2, 0) => 5,
            (1, 2) => 6,
            (2, 1) => 7,
            (0, 3) => 8,
            (3, 0) => 9,
            _ => panic!("({}, {}) is not a cubic category", self.r, self.b),
        }
    }

    /// Number of white neighbours.
    pub fn whites(self) -> u8 {
        3 - self.r - self.b
    }

    /// Categories with at least one white neighbour.
    pub fn has_white_neighbor(self) -> bool {
        self.r + self.b <= 2
    }

    pub fn transpose(self) -> Self {
        Self {
            r: self.b,
            b: self.r,
        }
    }

    /// Short label such as `w12`.
    pub fn label(self) -> String {
        format!("w{}{}", self.r, self.b)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.r, self.b)
    }
}

/// Probabilities of turning red or blue; staying white is the remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRule {
    pub red: Prob,
    pub blue: Prob,
}

impl RoundRule {
    pub fn inert() -> Self {
        Self {
            red: Prob::new(),
            blue: Prob::new(),
        }
    }

    pub fn new(red: Prob, blue: Prob) -> Self {
        Self { red, blue }
    }

    pub fn white(&self) -> Prob {
        Prob::from(1) - &self.red - &self.blue
    }

    pub fn is_inert(&self) -> bool {
        self.red == 0 && self.blue == 0
    }

    pub fn swapped(&self) -> Self {
        Self {
            red: self.blue.clone(),
            blue: self.red.clone(),
        }
    }
}

/// One rule per category, indexed by [`Category::index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable([RoundRule; 10]);

impl Default for RuleTable {
    fn default() -> Self {
        Self::inert()
    }
}

impl RuleTable {
    pub fn inert() -> Self {
        Self(std::array::from_fn(|_| RoundRule::inert()))
    }

    pub fn get(&self, c: Category) -> &RoundRule {
        &self.0[c.index()]
    }

    pub fn set(&mut self, c: Category, rule: RoundRule) {
        self.0[c.index()] = rule;
    }

    pub fn with(mut self, c: Category, red: Prob, blue: Prob) -> Self {
        self.set(c, RoundRule::new(red, blue));
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, &RoundRule)> {
        Category::ALL.iter().copied().zip(self.0.iter())
    }

    /// Exchanges the roles of red and blue and transposes categories.
    pub fn swapped(&self) -> Self {
        Self(std::array::from_fn(|i| {
            self.get(Category::ALL[i].transpose()).swapped()
        }))
    }

    pub fn is_inert(&self) -> bool {
        self.0.iter().all(RoundRule::is_inert)
    }
}

/// Rounds `from..=to` (1-based, inclusive) share one rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub from: u32,
    pub to: u32,
    pub rules: RuleTable,
}

impl Segment {
    pub fn new(from: u32, to: u32, rules: RuleTable) -> Self {
        Self { from, to, rules }
    }

    pub fn contains(&self, k: u32) -> bool {
        self.from <= k && k <= self.to
    }
}

/// A problem found by [`Schedule::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoRounds,
    EmptySegment {
        index: usize,
        from: u32,
        to: u32,
    },
    Gap {
        from: u32,
        to: u32,
    },
    Overlap {
        from: u32,
        to: u32,
    },
    BeyondLastRound {
        to: u32,
        rounds: u32,
    },
    Probability {
        from: u32,
        to: u32,
        category: Category,
        red: Prob,
        blue: Prob,
        reason: &'static str,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoRounds => write!(f, "schedule has no rounds"),
            Violation::EmptySegment { index, from, to } => {
                write!(f, "segment {index} has empty range {from}..={to}")
            }
            Violation::Gap { from, to } => write!(f, "rounds {from}..={to} are not covered"),
            Violation::Overlap { from, to } => write!(f, "rounds {from}..={to} are covered twice"),
            Violation::BeyondLastRound { to, rounds } => {
                write!(
                    f,
                    "segment reaches round {to} beyond the last round {rounds}"
                )
            }
            Violation::Probability {
                from,
                to,
                category,
                red,
                blue,
                reason,
            } => write!(
                f,
                "rounds {from}..={to}, category {category}: pR = {}, pB = {}: {reason}",
                format_prob(red),
                format_prob(blue)
            ),
        }
    }
}

/// The full parameter family of the coloring procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    rounds: u32,
    segments: Vec<Segment>,
}

impl Schedule {
    /// Builds a schedule without checking it; see [`Schedule::validate`].
    pub fn new(rounds: u32, mut segments: Vec<Segment>) -> Self {
        segments.sort_by_key(|s| (s.from, s.to));
        Self { rounds, segments }
    }

    /// A schedule in which nothing ever happens.
    pub fn inert(rounds: u32) -> Self {
        Self::new(rounds, vec![Segment::new(1, rounds, RuleTable::inert())])
    }

    pub fn from_paper(params: &PaperParams) -> Self {
        params.build()
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Index of the segment covering round `k`.
    pub fn segment_index(&self, k: u32) -> Result<usize, ScheduleError> {
        if k == 0 || k > self.rounds {
            return Err(ScheduleError::RoundOutOfRange {
                round: k,
                rounds: self.rounds,
            });
        }
        let pos = self.segments.partition_point(|s| s.from <= k);
        if pos == 0 || !self.segments[pos - 1].contains(k) {
            return Err(ScheduleError::RoundNotCovered(k));
        }
        Ok(pos - 1)
    }

    pub fn table_at(&self, k: u32) -> Result<&RuleTable, ScheduleError> {
        Ok(&self.segments[self.segment_index(k)?].rules)
    }

    /// `(pW, pR, pB)` for category `c` in round `k`.
    pub fn rule_at(&self, k: u32, c: Category) -> Result<(Prob, Prob, Prob), ScheduleError> {
        let rule = self.table_at(k)?.get(c);
        Ok((rule.white(), rule.red.clone(), rule.blue.clone()))
    }

    /// Lists every broken invariant; empty when the schedule is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.rounds == 0 {
            out.push(Violation::NoRounds);
        }
        let mut next = 1u32;
        for (index, seg) in self.segments.iter().enumerate() {
            if seg.from > seg.to || seg.from == 0 {
                out.push(Violation::EmptySegment {
                    index,
                    from: seg.from,
                    to: seg.to,
                });
                continue;
            }
            if seg.from > next {
                out.push(Violation::Gap {
                    from: next,
                    to: seg.from - 1,
                });
            } else if seg.from < next {
                out.push(Violation::Overlap {
                    from: seg.from,
                    to: seg.to.min(next - 1),
                });
            }
            if seg.to > self.rounds {
                out.push(Violation::BeyondLastRound {
                    to: seg.to,
                    rounds: self.rounds,
                });
            }
            next = next.max(seg.to.saturating_add(1));
            for (category, rule) in seg.rules.iter() {
                let reason = if rule.red < 0 || rule.red > 1 {
                    Some("pR outside [0, 1]")
                } else if rule.blue < 0 || rule.blue > 1 {
                    Some("pB outside [0, 1]")
                } else if rule.white() < 0 {
                    Some("pR + pB exceeds 1")
                } else {
                    None
                };
                if let Some(reason) = reason {
                    out.push(Violation::Probability {
                        from: seg.from,
                        to: seg.to,
                        category,
                        red: rule.red.clone(),
                        blue: rule.blue.clone(),
                        reason,
                    });
                }
            }
        }
        if self.rounds > 0 && next <= self.rounds {
            out.push(Violation::Gap {
                from: next,
                to: self.rounds,
            });
        }
        out
    }

    /// Exchanges red and blue everywhere.
    pub fn swapped(&self) -> Self {
        Self {
            rounds: self.rounds,
            segments: self
                .segments
                .iter()
                .map(|s| Segment::new(s.from, s.to, s.rules.swapped()))
                .collect(),
        }
    }

    /// The same schedule cut off after round `k`.
    pub fn truncated(&self, k: u32) -> Self {
        let k = k.min(self.rounds);
        let segments = self
            .segments
            .iter()
            .filter(|s| s.from <= k)
            .map(|s| Segment::new(s.from, s.to.min(k), s.rules.clone()))
            .collect();
        Self {
            rounds: k,
            segments,
        }
    }

    /// Serializes into the explicit segment form of the text format.
    pub fn to_text(&self) -> String {
        format::write_schedule(self)
    }
}

impl std::str::FromStr for Schedule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        format::parse_schedule(s)
    }
}

/// Parses a schedule file (either form).
pub fn load_schedule(text: &str) -> Result<Schedule, ScheduleError> {
    format::parse_schedule(text)
}

pub fn save_schedule(schedule: &Schedule) -> String {
    schedule.to_text()
}

pub fn build_paper_schedule(params: &PaperParams) -> Schedule {
    params.build()
}

/// Two-phase parameterization: one seeding round, then `phase1_rounds`
/// rounds of neighbour-driven coloring, then `phase2_rounds` rounds that also
/// color `(1,1)` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperParams {
    pub p0: Prob,
    pub p_red: Prob,
    pub p_blue: Prob,
    pub p_mixed: Prob,
    pub phase1_rounds: u32,
    pub phase2_rounds: u32,
}

fn pow2(exp: u32) -> Prob {
    Prob::from((1, 1u64 << exp))
}

impl Default for PaperParams {
    fn default() -> Self {
        Self::paper_defaults()
    }
}

impl PaperParams {
    pub const DEFAULT_PHASE1_ROUNDS: u32 = 34_919;
    pub const DEFAULT_PHASE2_ROUNDS: u32 = 283_974;

    /// `p0 = 2^-18, pR = 2^-11, pB = 1, pRB = 2^-17`, 34 919 + 283 974 rounds.
    pub fn paper_defaults() -> Self {
        Self {
            p0: pow2(18),
            p_red: pow2(11),
            p_blue: Prob::from(1),
            p_mixed: pow2(17),
            phase1_rounds: Self::DEFAULT_PHASE1_ROUNDS,
            phase2_rounds: Self::DEFAULT_PHASE2_ROUNDS,
        }
    }

    pub fn with_phases(mut self, phase1_rounds: u32, phase2_rounds: u32) -> Self {
        self.phase1_rounds = phase1_rounds;
        self.phase2_rounds = phase2_rounds;
        self
    }

    /// Total number of rounds `K1 + K2 + 1`.
    pub fn rounds(&self) -> u32 {
        self.phase1_rounds + self.phase2_rounds + 1
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        for (name, p) in [
            ("p0", &self.p0),
            ("pR", &self.p_red),
            ("pB", &self.p_blue),
            ("pRB", &self.p_mixed),
        ] {
            if *p < 0 || *p > 1 {
                return Err(ScheduleError::InvalidParams(format!(
                    "{name} = {} is not in [0, 1]",
                    format_prob(p)
                )));
            }
        }
        Ok(())
    }

    /// Non-fatal remarks about the intended ordering `pRB << pR << pB`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.p_red > self.p_blue {
            out.push("pR exceeds pB; the procedure expects pR much smaller than pB".to_string());
        }
        if self.p_mixed > self.p_red {
            out.push("pRB exceeds pR; the procedure expects pRB much smaller than pR".to_string());
        }
        out
    }

    /// Round 1: `(0,0)` turns red or blue with probability `p0/2` each.
    pub fn seeding_rules(&self) -> RuleTable {
        let half = Prob::from(&self.p0 / 2u32);
        RuleTable::inert().with(Category::new(0, 0), half.clone(), half)
    }

    /// Rules of rounds `2..`; `mixed` enables the `(1,1)` rule of the second phase.
    pub fn phase_rules(&self, mixed: bool) -> RuleTable {
        let one = || Prob::from(1);
        let zero = Prob::new;
        let mut t = RuleTable::inert()
            // at least two blue neighbours: red
            .with(Category::new(0, 2), one(), zero())
            .with(Category::new(0, 3), one(), zero())
            .with(Category::new(1, 2), one(), zero())
            // at least two red neighbours: blue
            .with(Category::new(2, 0), zero(), one())
            .with(Category::new(3, 0), zero(), one())
            .with(Category::new(2, 1), zero(), one())
            .with(Category::new(0, 1), self.p_red.clone(), zero())
            .with(Category::new(1, 0), zero(), self.p_blue.clone());
        if mixed {
            let half = Prob::from(&self.p_mixed / 2u32);
            t.set(Category::new(1, 1), RoundRule::new(half.clone(), half));
        }
        t
    }

    pub fn build(&self) -> Schedule {
        let k1 = self.phase1_rounds;
        let rounds = self.rounds();
        let mut segments = vec![Segment::new(1, 1, self.seeding_rules())];
        if k1 > 0 {
            segments.push(Segment::new(2, k1 + 1, self.phase_rules(false)));
        }
        if self.phase2_rounds > 0 {
            segments.push(Segment::new(k1 + 2, rounds, self.phase_rules(true)));
        }
        Schedule { rounds, segments }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Prob {
        parse_prob(s).unwrap()
    }

    #[test]
    fn categories_are_indexed_consistently() {
        for (i, c) in Category::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.transpose().transpose(), *c);
            assert!(c.r + c.b <= 3);
        }
        assert_eq!(Category::checked(2, 2), None);
        assert_eq!(
            Category::ALL
                .iter()
                .filter(|c| c.has_white_neighbor())
                .count(),
            6
        );
    }

    #[test]
    fn paper_defaults_have_three_segments() {
        let s = PaperParams::paper_defaults().build();
        assert_eq!(s.rounds(), 318_894);
        assert_eq!(s.segments().len(), 3);
        assert!(s.validate().is_empty());
    }

    #[test]
    fn degenerate_one_round_schedule() {
        let params = PaperParams {
            p0: Prob::from(1),
            ..PaperParams::paper_defaults()
        }
        .with_phases(0, 0);
        let s = params.build();
        assert_eq!(s.rounds(), 1);
        assert_eq!(s.segments().len(), 1);
        let (w, r, b) = s.rule_at(1, Category::new(0, 0)).unwrap();
        assert_eq!((w, r, b), (p("0"), p("1/2"), p("1/2")));
    }

    #[test]
    fn rule_lookup_matches_phase_table() {
        let s = PaperParams::paper_defaults().build();
        let (w, r, b) = s.rule_at(1, Category::new(0, 0)).unwrap();
        assert_eq!(w, Prob::from(1) - p("2^-18"));
        assert_eq!(r, p("2^-19"));
        assert_eq!(b, p("2^-19"));
        assert_eq!(
            s.rule_at(2, Category::new(0, 2)).unwrap(),
            (p("0"), p("1"), p("0"))
        );
        // (1,1) is inert until round K1 + 2
        assert_eq!(
            s.rule_at(10, Category::new(1, 1)).unwrap(),
            (p("1"), p("0"), p("0"))
        );
        assert_eq!(s.rule_at(34_920, Category::new(1, 1)).unwrap().0, p("1"));
        assert_eq!(
            s.rule_at(34_921, Category::new(1, 1)).unwrap().1,
            p("2^-18")
        );
        assert_eq!(s.rule_at(5, Category::new(1, 2)).unwrap().1, p("1"));
        assert_eq!(s.rule_at(5, Category::new(2, 1)).unwrap().2, p("1"));
        assert_eq!(s.rule_at(5, Category::new(0, 0)).unwrap().0, p("1"));
    }

    #[test]
    fn rule_lookup_range_checked() {
        let s = PaperParams::paper_defaults().build();
        assert!(matches!(
            s.rule_at(s.rounds() + 1, Category::new(0, 0)),
            Err(ScheduleError::RoundOutOfRange { .. })
        ));
        assert!(s.rule_at(0, Category::new(0, 0)).is_err());
    }

    #[test]
    fn validate_flags_excess_probability() {
        let t = RuleTable::inert().with(Category::new(0, 1), p("0.75"), p("0.75"));
        let s = Schedule::new(3, vec![Segment::new(1, 3, t)]);
        let v = s.validate();
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::Probability { category, .. } => assert_eq!(*category, Category::new(0, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(v[0].to_string().contains("(0,1)"));
    }

    #[test]
    fn validate_flags_gap_and_overlap() {
        let s = Schedule::new(
            10,
            vec![
                Segment::new(1, 6, RuleTable::inert()),
                Segment::new(8, 10, RuleTable::inert()),
            ],
        );
        assert_eq!(s.validate(), vec![Violation::Gap { from: 7, to: 7 }]);
        assert!(matches!(
            s.rule_at(7, Category::new(0, 0)),
            Err(ScheduleError::RoundNotCovered(7))
        ));

        let s = Schedule::new(
            10,
            vec![
                Segment::new(1, 6, RuleTable::inert()),
                Segment::new(5, 10, RuleTable::inert()),
            ],
        );
        assert_eq!(s.validate(), vec![Violation::Overlap { from: 5, to: 6 }]);

        let s = Schedule::new(10, vec![Segment::new(1, 6, RuleTable::inert())]);
        assert_eq!(s.validate(), vec![Violation::Gap { from: 7, to: 10 }]);
    }

    #[test]
    fn swap_is_an_involution() {
        let s = PaperParams::paper_defaults().with_phases(5, 7).build();
        assert_eq!(s.swapped().swapped(), s);
        assert_ne!(s.swapped(), s);
    }

    #[test]
    fn symmetric_params_are_swap_fixed_points() {
        let params = PaperParams {
            p_red: p("2^-3"),
            p_blue: p("2^-3"),
            ..PaperParams::paper_defaults()
        }
        .with_phases(4, 4);
        let s = params.build();
        assert_eq!(s.swapped(), s);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let s = PaperParams::paper_defaults().with_phases(3, 5).build();
        let t = s.truncated(4);
        assert_eq!(t.rounds(), 4);
        assert!(t.validate().is_empty());
        for k in 1..=4 {
            assert_eq!(t.table_at(k).unwrap(), s.table_at(k).unwrap());
        }
    }

    #[test]
    fn params_out_of_range_rejected() {
        let bad = PaperParams {
            p_red: p("3/2"),
            ..PaperParams::paper_defaults()
        };
        assert!(bad.validate().is_err());
        let odd = PaperParams {
            p_red: p("1"),
            p_blue: p("2^-3"),
            ..PaperParams::paper_defaults()
        };
        assert_eq!(odd.warnings().len(), 1);
    }
}
