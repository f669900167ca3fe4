use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SimError;

/// Attempts allowed before `gen_cubic` gives up. A random pairing of a cubic
/// configuration is simple with probability about `e^-2`, so this is never
/// reached in practice.
pub const MAX_PAIRING_ATTEMPTS: u32 = 10_000;

const GRAPH_STREAM: u64 = u64::MAX;

/// A simple 3-regular graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicGraph {
    adj: Vec<[u32; 3]>,
}

impl CubicGraph {
    /// Builds a graph from adjacency lists, checking every invariant.
    pub fn from_adjacency(adj: Vec<[u32; 3]>) -> Result<Self, SimError> {
        let g = CubicGraph { adj };
        g.check()?;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        3 * self.adj.len() / 2
    }

    pub fn neighbours(&self, v: usize) -> &[u32; 3] {
        &self.adj[v]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, ns)| {
            ns.iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    fn check(&self) -> Result<(), SimError> {
        let n = self.adj.len();
        if n < 4 || n % 2 != 0 {
            return Err(SimError::OddOrSmall(n as u64));
        }
        for (v, ns) in self.adj.iter().enumerate() {
            for (i, &u) in ns.iter().enumerate() {
                let u = u as usize;
                let bad = |why: &str| SimError::InvalidGraph(format!("vertex {v}: {why}"));
                if u >= n {
                    return Err(bad(&format!("neighbour {u} out of range")));
                }
                if u == v {
                    return Err(bad("self-loop"));
                }
                if ns[..i].contains(&(u as u32)) {
                    return Err(bad(&format!("parallel edge to {u}")));
                }
                if !self.adj[u].contains(&(v as u32)) {
                    return Err(bad(&format!("edge to {u} is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Text form: `n` on the first line, then one line of three 0-based
    /// neighbour indices per vertex.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.adj.len() * 24);
        writeln!(s, "{}", self.adj.len()).unwrap();
        for [a, b, c] in &self.adj {
            writeln!(s, "{a} {b} {c}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SimError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, why: String| SimError::Parse {
            line: line + 1,
            why,
        };
        let (i, first) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty graph file".into()))?;
        let n: usize = first
            .parse()
            .map_err(|_| parse_err(i, format!("expected vertex count, got {first:?}")))?;
        let mut adj = Vec::with_capacity(n);
        for (i, line) in lines {
            let ns: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| parse_err(i, format!("bad neighbour list {line:?}")))?;
            let ns: [u32; 3] = ns
                .try_into()
                .map_err(|_| parse_err(i, "expected exactly 3 neighbours".into()))?;
            adj.push(ns);
        }
        if adj.len() != n {
            return Err(parse_err(
                i,
                format!("header says {n} vertices, found {}", adj.len()),
            ));
        }
        Self::from_adjacency(adj)
    }

    /// The complete graph on four vertices.
    pub fn k4() -> Self {
        CubicGraph {
            adj: vec![[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]],
        }
    }

    /// The Petersen graph: outer 5-cycle `0..5`, inner pentagram `5..10`.
    pub fn petersen() -> Self {
        let adj = (0..10u32)
            .map(|v| {
                if v < 5 {
                    [(v + 1) % 5, (v + 4) % 5, v + 5]
                } else {
                    let i = v - 5;
                    [5 + (i + 2) % 5, 5 + (i + 3) % 5, i]
                }
            })
            .collect();
        CubicGraph { adj }
    }
}

/// Uniform random simple cubic graph on `n` vertices.
///
/// Uses the pairing model: the `3n` half-edges are shuffled and paired
/// consecutively, and the whole pairing is rejected if it has a loop or a
/// repeated edge.
pub fn gen_cubic(n: u64, seed: u64) -> Result<CubicGraph, SimError> {
    if n < 4 || n % 2 != 0 {
        return Err(SimError::OddOrSmall(n));
    }
    let n = usize::try_from(n).map_err(|_| SimError::OddOrSmall(n))?;
    if 3 * n > u32::MAX as usize {
        return Err(SimError::InvalidGraph(format!("{n} vertices is too many")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // vertex draws use streams below 2^32; keep the graph on its own stream
    rng.set_stream(GRAPH_STREAM);
    let mut points: Vec<u32> = (0..3 * n as u32).collect();
    let mut adj = vec![[u32::MAX; 3]; n];
    let mut fill = vec![0u8; n];
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        fill.fill(0);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0] / 3, pair[1] / 3);
            if u == v || adj[u as usize][..fill[u as usize] as usize].contains(&v) {
                continue 'attempt;
            }
            adj[u as usize][fill[u as usize] as usize] = v;
            adj[v as usize][fill[v as usize] as usize] = u;
            fill[u as usize] += 1;
            fill[v as usize] += 1;
        }
        return Ok(CubicGraph { adj });
    }
    Err(SimError::PairingAttempts(MAX_PAIRING_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_is_k4() {
        for seed in 0..20 {
            let g = gen_cubic(4, seed).unwrap();
            g.check().unwrap();
            for v in 0..4 {
                let mut ns = *g.neighbours(v);
                ns.sort_unstable();
                let want: Vec<u32> = (0..4).filter(|&u| u != v as u32).collect();
                assert_eq!(ns.to_vec(), want);
            }
        }
    }

    #[test]
    fn generated_graphs_are_simple_cubic() {
        for (n, seed) in [(6, 1), (10, 2), (100, 3), (1000, 4)] {
            let g = gen_cubic(n, seed).unwrap();
            g.check().unwrap();
            assert_eq!(g.edges().count(), 3 * n as usize / 2);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(gen_cubic(2000, 9).unwrap(), gen_cubic(2000, 9).unwrap());
        assert_ne!(gen_cubic(2000, 9).unwrap(), gen_cubic(2000, 10).unwrap());
    }

    #[test]
    fn odd_or_tiny_rejected() {
        assert!(matches!(gen_cubic(101, 0), Err(SimError::OddOrSmall(101))));
        assert!(matches!(gen_cubic(2, 0), Err(SimError::OddOrSmall(2))));
    }

    #[test]
    fn text_round_trip() {
        let g = CubicGraph::petersen();
        g.check().unwrap();
        assert_eq!(CubicGraph::from_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn text_rejects_bad_graphs() {
        assert!(CubicGraph::from_text("4\n1 2 3\n0 2 3\n0 1 3\n0 1 1\n").is_err());
        assert!(CubicGraph::from_text("4\n1 2 3\n0 2 3\n0 1 3\n").is_err());
        assert!(CubicGraph::from_text("4\n1 2 3\n0 2 3\n0 1 3\n0 1\n").is_err());
        assert!(CubicGraph::from_text("").is_err());
    }
}
