//! Monte-Carlo simulation of the coloring procedure on random cubic graphs.

mod cut;
mod cycles;
mod estimate;
mod graph;
mod rng;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::schedule::{Category, RuleTable, Schedule};

pub use cut::{extract_cut, CutPolicy, CutResult};
pub use cycles::{count_short_cycles, CycleHistogram, MAX_CYCLE_LEN};
pub use estimate::{
    estimate, write_report, EstimateOptions, SampleRow, Stat, Summary, REPORT_HEADER,
};
pub use graph::{gen_cubic, CubicGraph, MAX_PAIRING_ATTEMPTS};
pub use rng::CounterRng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("vertex count must be even and at least 4, got {0}")]
    OddOrSmall(u64),
    #[error("invalid cubic graph: {0}")]
    InvalidGraph(String),
    #[error("graph file line {line}: {why}")]
    Parse { line: usize, why: String },
    #[error("no simple pairing found in {0} attempts")]
    PairingAttempts(u32),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("unknown cut policy {0:?} (expected greedy or all-blue)")]
    UnknownPolicy(String),
    #[error("unknown engine {0:?} (expected event or sync)")]
    UnknownEngine(String),
    #[error("invariant violated after round {round}: {detail}")]
    Invariant { round: u32, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Color {
    White,
    Red,
    Blue,
}

/// How rounds are executed. Both give the same distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Every white vertex draws a decision every round.
    Sync,
    /// Each white vertex samples the round it next leaves white, and
    /// resamples when its category or the rule table changes.
    #[default]
    Event,
}

impl FromStr for Engine {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "sync" => Ok(Engine::Sync),
            "event" => Ok(Engine::Event),
            other => Err(SimError::UnknownEngine(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    pub engine: Engine,
    /// Recompute neighbour counts and check color persistence after every
    /// round that changed something. Slow.
    pub check_invariants: bool,
}

// Lanes of the counter RNG.
const LANE_WAIT: u32 = 0;
const LANE_COLOR: u32 = 1;
const LANE_SYNC: u32 = 2;

/// Colors and neighbour counts after some number of rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimState {
    pub round: u32,
    pub seed: u64,
    pub colors: Vec<Color>,
    /// `(red, blue)` neighbour counts per vertex.
    pub counts: Vec<(u8, u8)>,
}

impl SimState {
    pub fn new(n: usize, seed: u64) -> Self {
        SimState {
            round: 0,
            seed,
            colors: vec![Color::White; n],
            counts: vec![(0, 0); n],
        }
    }

    pub fn category(&self, v: usize) -> Category {
        let (r, b) = self.counts[v];
        Category::new(r, b)
    }

    pub fn color_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for col in &self.colors {
            match col {
                Color::Red => c.0 += 1,
                Color::Blue => c.1 += 1,
                Color::White => c.2 += 1,
            }
        }
        c
    }

    /// Edges with one red and one blue endpoint.
    pub fn red_blue_edges(&self, g: &CubicGraph) -> usize {
        g.edges()
            .filter(|&(u, v)| {
                matches!(
                    (self.colors[u], self.colors[v]),
                    (Color::Red, Color::Blue) | (Color::Blue, Color::Red)
                )
            })
            .count()
    }

    /// Recomputes every neighbour count from the colors.
    pub fn check_counts(&self, g: &CubicGraph) -> Result<(), SimError> {
        for v in 0..g.n() {
            let mut want = (0u8, 0u8);
            for &u in g.neighbours(v) {
                match self.colors[u as usize] {
                    Color::Red => want.0 += 1,
                    Color::Blue => want.1 += 1,
                    Color::White => {}
                }
            }
            if want != self.counts[v] {
                return Err(SimError::Invariant {
                    round: self.round,
                    detail: format!(
                        "vertex {v} counts {:?}, neighbours give {want:?}",
                        self.counts[v]
                    ),
                });
            }
        }
        Ok(())
    }

    fn paint(&mut self, g: &CubicGraph, v: usize, c: Color) {
        debug_assert_eq!(self.colors[v], Color::White, "colored vertex recolored");
        self.colors[v] = c;
        for &u in g.neighbours(v) {
            let cnt = &mut self.counts[u as usize];
            match c {
                Color::Red => cnt.0 += 1,
                Color::Blue => cnt.1 += 1,
                Color::White => unreachable!(),
            }
        }
    }
}

/// `(red, blue)` probabilities per category as doubles.
fn table_f64(t: &RuleTable) -> [(f64, f64); 10] {
    let mut out = [(0.0, 0.0); 10];
    for (c, rule) in t.iter() {
        out[c.index()] = (rule.red.to_f64(), rule.blue.to_f64());
    }
    out
}

/// Runs every round of `s` on `g` with the default engine.
pub fn run_procedure(g: &CubicGraph, s: &Schedule, seed: u64) -> Result<SimState, SimError> {
    run_with(g, s, seed, SimOptions::default())
}

pub fn run_with(
    g: &CubicGraph,
    s: &Schedule,
    seed: u64,
    opts: SimOptions,
) -> Result<SimState, SimError> {
    let issues = s.validate();
    if !issues.is_empty() {
        let msg: Vec<String> = issues.iter().map(|v| v.to_string()).collect();
        return Err(SimError::Schedule(msg.join("; ")));
    }
    let rng = CounterRng::new(seed);
    let mut st = SimState::new(g.n(), seed);
    match opts.engine {
        Engine::Sync => run_sync(g, s, &rng, &mut st, opts.check_invariants)?,
        Engine::Event => run_event(g, s, &rng, &mut st, opts.check_invariants)?,
    }
    st.round = s.rounds();
    Ok(st)
}

fn after_round(
    g: &CubicGraph,
    st: &mut SimState,
    k: u32,
    fired: &[(usize, Color)],
    check: bool,
) -> Result<(), SimError> {
    let before = check.then(|| st.colors.clone());
    for &(v, c) in fired {
        st.paint(g, v, c);
    }
    st.round = k;
    if let Some(before) = before {
        if let Some(v) =
            (0..g.n()).find(|&v| before[v] != Color::White && before[v] != st.colors[v])
        {
            return Err(SimError::Invariant {
                round: k,
                detail: format!("vertex {v} changed color"),
            });
        }
        st.check_counts(g)?;
    }
    Ok(())
}

fn run_sync(
    g: &CubicGraph,
    s: &Schedule,
    rng: &CounterRng,
    st: &mut SimState,
    check: bool,
) -> Result<(), SimError> {
    let mut fired = Vec::new();
    for seg in s.segments() {
        let probs = table_f64(&seg.rules);
        for k in seg.from..=seg.to {
            fired.clear();
            for v in 0..g.n() {
                if st.colors[v] != Color::White {
                    continue;
                }
                let (pr, pb) = probs[st.category(v).index()];
                if pr + pb == 0.0 {
                    continue;
                }
                let u = rng.uniform(v as u32, k, LANE_SYNC);
                if u <= pr {
                    fired.push((v, Color::Red));
                } else if u <= pr + pb {
                    fired.push((v, Color::Blue));
                }
            }
            after_round(g, st, k, &fired, check)?;
        }
    }
    Ok(())
}

/// Event queue entry: `(round, vertex, version, red?)`.
type Event = Reverse<(u32, u32, u32, bool)>;

struct EventQueue<'a> {
    rng: &'a CounterRng,
    heap: BinaryHeap<Event>,
    version: Vec<u32>,
}

impl EventQueue<'_> {
    /// Samples the first round `>= start` in which `v` leaves white under a
    /// fixed category, dropping it if that is after `end`.
    fn schedule(&mut self, v: usize, start: u32, end: u32, (pr, pb): (f64, f64)) {
        self.version[v] = self.version[v].wrapping_add(1);
        let q = pr + pb;
        if q <= 0.0 {
            return;
        }
        let wait = if q >= 1.0 {
            0.0
        } else {
            (self.rng.uniform(v as u32, start, LANE_WAIT).ln() / (-q).ln_1p()).floor()
        };
        if wait > (end - start) as f64 {
            return;
        }
        let at = start + wait as u32;
        let red = self.rng.uniform(v as u32, at, LANE_COLOR) <= pr / q;
        self.heap
            .push(Reverse((at, v as u32, self.version[v], red)));
    }
}

fn run_event(
    g: &CubicGraph,
    s: &Schedule,
    rng: &CounterRng,
    st: &mut SimState,
    check: bool,
) -> Result<(), SimError> {
    let n = g.n();
    let mut q = EventQueue {
        rng,
        heap: BinaryHeap::new(),
        version: vec![0; n],
    };
    let mut touched_at = vec![0u32; n];
    let mut fired = Vec::new();
    let mut touched = Vec::new();
    for seg in s.segments() {
        let probs = table_f64(&seg.rules);
        for v in 0..n {
            if st.colors[v] == Color::White {
                q.schedule(v, seg.from, seg.to, probs[st.category(v).index()]);
            }
        }
        while let Some(&Reverse((k, ..))) = q.heap.peek() {
            debug_assert!(k <= seg.to);
            fired.clear();
            while let Some(&Reverse((at, v, ver, red))) = q.heap.peek() {
                if at != k {
                    break;
                }
                q.heap.pop();
                let v = v as usize;
                if ver == q.version[v] && st.colors[v] == Color::White {
                    fired.push((v, if red { Color::Red } else { Color::Blue }));
                }
            }
            after_round(g, st, k, &fired, check)?;
            if k == seg.to {
                continue;
            }
            touched.clear();
            for &(v, _) in &fired {
                for &u in g.neighbours(v) {
                    let u = u as usize;
                    if st.colors[u] == Color::White && touched_at[u] != k {
                        touched_at[u] = k;
                        touched.push(u);
                    }
                }
            }
            for &u in &touched {
                q.schedule(u, k + 1, seg.to, probs[st.category(u).index()]);
            }
        }
    }
    Ok(())
}
