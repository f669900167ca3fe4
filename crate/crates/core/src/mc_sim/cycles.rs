use super::CubicGraph;

/// Longest cycle length `count_short_cycles` accepts.
pub const MAX_CYCLE_LEN: usize = 16;

/// Number of cycles of each length `3..=lmax`; entry `i` is length `i + 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleHistogram {
    pub lmax: usize,
    pub counts: Vec<u64>,
}

impl CycleHistogram {
    pub fn count(&self, len: usize) -> u64 {
        if (3..=self.lmax).contains(&len) {
            self.counts[len - 3]
        } else {
            0
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Vertices lying on at least one counted cycle is at most this.
    pub fn vertex_bound(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| c * (i as u64 + 3))
            .sum()
    }

    /// Shortest counted cycle length, if any.
    pub fn girth(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c > 0).map(|i| i + 3)
    }
}

/// Counts all cycles of length `3..=lmax` exactly.
///
/// Each cycle is found from its smallest vertex `s`, walking only through
/// vertices larger than `s`; both orientations are found, so counts are
/// halved. Walks are pruned with BFS distances back to `s`.
pub fn count_short_cycles(g: &CubicGraph, lmax: usize) -> CycleHistogram {
    assert!(
        (3..=MAX_CYCLE_LEN).contains(&lmax),
        "cycle length cap must be in 3..={MAX_CYCLE_LEN}"
    );
    let n = g.n();
    let mut twice = vec![0u64; lmax - 2];
    let mut dist = vec![u8::MAX; n];
    let mut seen: Vec<usize> = Vec::new();
    let mut on_path = vec![false; n];
    let radius = (lmax / 2) as u8;
    for s in 0..n {
        // BFS from s through vertices > s, up to the radius any short cycle can reach.
        for &v in &seen {
            dist[v] = u8::MAX;
        }
        seen.clear();
        dist[s] = 0;
        seen.push(s);
        let mut head = 0;
        while head < seen.len() {
            let v = seen[head];
            head += 1;
            if dist[v] == radius {
                continue;
            }
            for &u in g.neighbours(v) {
                let u = u as usize;
                if u > s && dist[u] == u8::MAX {
                    dist[u] = dist[v] + 1;
                    seen.push(u);
                }
            }
        }
        on_path[s] = true;
        walk(g, s, s, 0, lmax, &dist, &mut on_path, &mut twice);
        on_path[s] = false;
    }
    CycleHistogram {
        lmax,
        counts: twice.into_iter().map(|c| c / 2).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn walk(
    g: &CubicGraph,
    s: usize,
    v: usize,
    len: usize,
    lmax: usize,
    dist: &[u8],
    on_path: &mut [bool],
    twice: &mut [u64],
) {
    for &u in g.neighbours(v) {
        let u = u as usize;
        if u == s {
            if len >= 2 {
                twice[len - 2] += 1;
            }
            continue;
        }
        if u < s || on_path[u] || dist[u] == u8::MAX {
            continue;
        }
        if len + 1 + dist[u] as usize > lmax {
            continue;
        }
        on_path[u] = true;
        walk(g, s, u, len + 1, lmax, dist, on_path, twice);
        on_path[u] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::super::gen_cubic;
    use super::*;

    /// Counts cycles by enumerating vertex subsets' cyclic orderings; only
    /// usable on tiny graphs.
    fn brute_force(g: &CubicGraph, lmax: usize) -> Vec<u64> {
        let n = g.n();
        let adjacent = |a: usize, b: usize| g.neighbours(a).contains(&(b as u32));
        let mut counts = vec![0u64; lmax - 2];
        fn extend(
            path: &mut Vec<usize>,
            n: usize,
            lmax: usize,
            adjacent: &dyn Fn(usize, usize) -> bool,
            counts: &mut [u64],
        ) {
            let len = path.len();
            if len >= 3 && adjacent(path[len - 1], path[0]) && path[1] < path[len - 1] {
                counts[len - 3] += 1;
            }
            if len == lmax {
                return;
            }
            for u in path[0] + 1..n {
                if !path.contains(&u) && adjacent(path[len - 1], u) {
                    path.push(u);
                    extend(path, n, lmax, adjacent, counts);
                    path.pop();
                }
            }
        }
        for s in 0..n {
            extend(&mut vec![s], n, lmax, &adjacent, &mut counts);
        }
        counts
    }

    #[test]
    fn k4_counts() {
        let h = count_short_cycles(&CubicGraph::k4(), 6);
        assert_eq!(h.count(3), 4);
        assert_eq!(h.count(4), 3);
        assert_eq!(h.count(5), 0);
        assert_eq!(h.girth(), Some(3));
    }

    #[test]
    fn petersen_counts_match_enumeration() {
        let g = CubicGraph::petersen();
        let h = count_short_cycles(&g, 10);
        assert_eq!(h.count(3), 0);
        assert_eq!(h.count(4), 0);
        assert_eq!(h.count(5), 12);
        assert_eq!(h.counts, brute_force(&g, 10));
        assert_eq!(h.girth(), Some(5));
    }

    #[test]
    fn random_graphs_match_enumeration() {
        for seed in 0..5 {
            let g = gen_cubic(14, seed).unwrap();
            assert_eq!(count_short_cycles(&g, 9).counts, brute_force(&g, 9));
        }
    }

    #[test]
    fn large_graph_histogram() {
        let g = gen_cubic(100_000, 3).unwrap();
        let h = count_short_cycles(&g, 12);
        assert_eq!(h.counts.len(), 10);
        // Poisson mean for length-3 cycles is 4/3; far more would mean a broken generator.
        assert!(h.count(3) < 20);
    }
}
