use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{Color, CubicGraph, SimError, SimState};

/// Where vertices still white at the end go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutPolicy {
    /// In vertex order, join the side opposite to the majority of the
    /// already-placed neighbours; ties go blue.
    #[default]
    Greedy,
    AllBlue,
}

impl FromStr for CutPolicy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "greedy" => Ok(CutPolicy::Greedy),
            "all-blue" => Ok(CutPolicy::AllBlue),
            other => Err(SimError::UnknownPolicy(other.to_string())),
        }
    }
}

impl fmt::Display for CutPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutPolicy::Greedy => "greedy",
            CutPolicy::AllBlue => "all-blue",
        })
    }
}

/// The cut `X = red side` after placing leftover white vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutResult {
    pub red_blue_edges: u64,
    pub final_cut_size: u64,
    /// `|X|` and `|V \ X|`.
    pub side_sizes: (u64, u64),
    pub per_edge_fraction: f64,
    pub per_vertex_fraction: f64,
    pub white_residual: u64,
}

pub fn extract_cut(g: &CubicGraph, st: &SimState, policy: CutPolicy) -> CutResult {
    let n = g.n();
    let mut in_x: Vec<Option<bool>> = st
        .colors
        .iter()
        .map(|c| match c {
            Color::Red => Some(true),
            Color::Blue => Some(false),
            Color::White => None,
        })
        .collect();
    let white_residual = in_x.iter().filter(|s| s.is_none()).count() as u64;
    for v in 0..n {
        if in_x[v].is_some() {
            continue;
        }
        in_x[v] = Some(match policy {
            CutPolicy::AllBlue => false,
            CutPolicy::Greedy => {
                let (mut xs, mut others) = (0, 0);
                for &u in g.neighbours(v) {
                    match in_x[u as usize] {
                        Some(true) => xs += 1,
                        Some(false) => others += 1,
                        None => {}
                    }
                }
                others > xs
            }
        });
    }
    let side: Vec<bool> = in_x.into_iter().map(|s| s.unwrap()).collect();
    let final_cut_size = g.edges().filter(|&(u, v)| side[u] != side[v]).count() as u64;
    let red_blue_edges = st.red_blue_edges(g) as u64;
    let x = side.iter().filter(|&&s| s).count() as u64;
    CutResult {
        red_blue_edges,
        final_cut_size,
        side_sizes: (x, n as u64 - x),
        per_edge_fraction: red_blue_edges as f64 / g.m() as f64,
        per_vertex_fraction: final_cut_size as f64 / n as f64,
        white_residual,
    }
}
