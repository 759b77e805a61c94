//! Exact bisection width for small graphs by branch and bound.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::{Cut, Side};
use crate::error::{Error, Result};
use crate::graph::{sample_configuration, to_multigraph, Multigraph};
use crate::improve::{local_search, random_bisection, MoveBudget};
use crate::seed::derive_indexed;
use crate::wave::{wave_bisect, WaveParams};

/// Largest vertex count accepted by [`exact_bisection`].
pub const MAX_EXACT_N: usize = 28;

/// Largest vertex count accepted by [`exact_vs_heuristic`].
pub const MAX_BATCH_N: usize = 16;

const PREFIX_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub width: usize,
    pub witness: Cut,
    /// Search nodes visited; depends on thread scheduling.
    pub explored: u64,
}

/// Vertices in BFS order from 0, with the later neighbours of each
/// position (loops dropped, parallel edges repeated).
struct Order {
    vertex: Vec<usize>,
    later: Vec<Vec<usize>>,
}

impl Order {
    fn new(g: &Multigraph) -> Self {
        let n = g.n();
        let mut pos = vec![usize::MAX; n];
        let mut vertex = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        for root in 0..n {
            if pos[root] != usize::MAX {
                continue;
            }
            pos[root] = vertex.len();
            vertex.push(root);
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for w in g.neighbors(u) {
                    if pos[w] == usize::MAX {
                        pos[w] = vertex.len();
                        vertex.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut later = vec![Vec::new(); n];
        for &(u, v) in g.edges() {
            if u == v {
                continue;
            }
            let (a, b) = if pos[u] < pos[v] { (pos[u], pos[v]) } else { (pos[v], pos[u]) };
            later[a].push(b);
        }
        Order { vertex, later }
    }
}

struct Search<'a> {
    order: &'a Order,
    half: usize,
    best: &'a AtomicUsize,
    side: Vec<u8>,
    count: [usize; 2],
    /// assigned neighbours of each position, per side
    seen: Vec<[u32; 2]>,
    cross: usize,
    /// sum over unassigned positions of min(seen[0], seen[1])
    forced: usize,
    local: Option<(usize, Vec<u8>)>,
    explored: u64,
}

impl<'a> Search<'a> {
    fn new(order: &'a Order, best: &'a AtomicUsize) -> Self {
        let n = order.vertex.len();
        Search {
            order,
            half: n / 2,
            best,
            side: vec![0; n],
            count: [0; 2],
            seen: vec![[0; 2]; n],
            cross: 0,
            forced: 0,
            local: None,
            explored: 0,
        }
    }

    fn assign(&mut self, p: usize, s: u8) {
        let si = s as usize;
        let before = self.seen[p][0].min(self.seen[p][1]) as usize;
        self.forced -= before;
        self.cross += self.seen[p][1 - si] as usize;
        self.side[p] = s;
        self.count[si] += 1;
        for &w in &self.order.later[p] {
            let old = self.seen[w][0].min(self.seen[w][1]);
            self.seen[w][si] += 1;
            let new = self.seen[w][0].min(self.seen[w][1]);
            self.forced += (new - old) as usize;
        }
    }

    fn unassign(&mut self, p: usize) {
        let si = self.side[p] as usize;
        for &w in &self.order.later[p] {
            let old = self.seen[w][0].min(self.seen[w][1]);
            self.seen[w][si] -= 1;
            let new = self.seen[w][0].min(self.seen[w][1]);
            self.forced -= (old - new) as usize;
        }
        self.count[si] -= 1;
        self.cross -= self.seen[p][1 - si] as usize;
        self.forced += self.seen[p][0].min(self.seen[p][1]) as usize;
    }

    /// Depth-first search below position `p`. Nodes whose bound equals the
    /// global best are still explored so that every task reports its first
    /// optimal leaf.
    fn dfs(&mut self, p: usize) {
        self.explored += 1;
        let bound = self.cross + self.forced;
        if bound > self.best.load(Ordering::Relaxed) {
            return;
        }
        if let Some((w, _)) = &self.local {
            if bound >= *w {
                return;
            }
        }
        if p == self.side.len() {
            self.best.fetch_min(self.cross, Ordering::Relaxed);
            self.local = Some((self.cross, self.side.clone()));
            return;
        }
        for s in 0..2u8 {
            if self.count[s as usize] < self.half {
                self.assign(p, s);
                self.dfs(p + 1);
                self.unassign(p);
            }
        }
    }
}

/// Minimum number of crossing edges over all perfect bisections.
///
/// The first vertex is fixed to side one. Ties are resolved towards the
/// lexicographically first assignment in BFS order, so the witness does not
/// depend on the thread count.
pub fn exact_bisection(g: &Multigraph) -> Result<ExactResult> {
    let n = g.n();
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidVertexCount { n, reason: "bisection needs a positive even n" });
    }
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge { n, max: MAX_EXACT_N });
    }
    let order = Order::new(g);
    let best = AtomicUsize::new(usize::MAX);
    let depth = PREFIX_DEPTH.min(n - 1);
    // position 0 is fixed to side one; the next `depth` positions are
    // enumerated into independent tasks
    let tasks: Vec<u32> = (0..1u32 << depth).collect();
    let results: Vec<(u32, Option<(usize, Vec<u8>)>, u64)> = tasks
        .into_par_iter()
        .map(|mask| {
            let mut s = Search::new(&order, &best);
            s.assign(0, 0);
            for i in 0..depth {
                let bit = ((mask >> (depth - 1 - i)) & 1) as u8;
                if s.count[bit as usize] >= s.half {
                    return (mask, None, 0);
                }
                s.assign(i + 1, bit);
            }
            s.dfs(depth + 1);
            (mask, s.local, s.explored)
        })
        .collect();
    let explored = results.iter().map(|r| r.2).sum();
    let (width, sides) = results
        .into_iter()
        .filter_map(|(mask, local, _)| local.map(|(w, s)| (w, mask, s)))
        .min_by_key(|&(w, mask, _)| (w, mask))
        .map(|(w, _, s)| (w, s))
        .expect("some balanced assignment exists");
    let mut by_vertex = vec![Side::One; n];
    for (p, &s) in sides.iter().enumerate() {
        by_vertex[order.vertex[p]] = if s == 0 { Side::One } else { Side::Two };
    }
    let witness = Cut::new(g, by_vertex)?;
    debug_assert_eq!(witness.crossing(), width);
    Ok(ExactResult { width, witness, explored })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    pub seed: u64,
    pub oracle: usize,
    pub wave: usize,
    pub local: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicReport {
    pub n: usize,
    pub instances: Vec<InstanceReport>,
    /// Instances where a heuristic beat the oracle; always empty unless
    /// something is broken.
    pub violations: Vec<usize>,
    pub mean_gap_wave: f64,
    pub mean_gap_local: f64,
}

/// Compare the oracle with both heuristics on random cubic multigraphs.
pub fn exact_vs_heuristic(batch: usize, n: usize, seed: u64) -> Result<HeuristicReport> {
    if n > MAX_BATCH_N {
        return Err(Error::TooLarge { n, max: MAX_BATCH_N });
    }
    let budget = MoveBudget::default();
    let instances = (0..batch)
        .into_par_iter()
        .map(|index| -> Result<InstanceReport> {
            let s = derive_indexed(seed, "exact-vs-heuristic", index as u64);
            let g = to_multigraph(&sample_configuration(n, s)?);
            let oracle = exact_bisection(&g)?.width;
            let wave = wave_bisect(&g, &WaveParams::for_n(n, s), &budget)?.cut.crossing();
            let local = local_search(&g, &random_bisection(&g, s), &budget).cut.crossing();
            Ok(InstanceReport { index, seed: s, oracle, wave, local })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = instances
        .iter()
        .filter(|r| r.wave < r.oracle || r.local < r.oracle)
        .map(|r| r.index)
        .collect();
    let gap = |h: fn(&InstanceReport) -> usize| {
        let rel: Vec<f64> = instances
            .iter()
            .filter(|r| r.oracle > 0)
            .map(|r| (h(r) as f64 - r.oracle as f64) / r.oracle as f64)
            .collect();
        if rel.is_empty() {
            0.0
        } else {
            rel.iter().sum::<f64>() / rel.len() as f64
        }
    };
    Ok(HeuristicReport {
        n,
        mean_gap_wave: gap(|r| r.wave),
        mean_gap_local: gap(|r| r.local),
        instances,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn small_named_graphs() {
        assert_eq!(exact_bisection(&named::complete4()).unwrap().width, 4);
        assert_eq!(exact_bisection(&named::cycle(6)).unwrap().width, 2);
        assert_eq!(exact_bisection(&named::prism(3)).unwrap().width, 3);
        assert_eq!(exact_bisection(&named::complete_bipartite33()).unwrap().width, 5);
        assert_eq!(exact_bisection(&named::petersen()).unwrap().width, 5);
    }

    #[test]
    fn witness_is_balanced() {
        let r = exact_bisection(&named::prism(5)).unwrap();
        assert!(r.witness.is_bisection(0));
        assert_eq!(r.witness.side(0), Side::One);
        assert_eq!(r.witness.crossing(), r.width);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(exact_bisection(&named::cycle(5)).is_err());
        assert!(exact_bisection(&named::cycle(30)).is_err());
        assert!(exact_vs_heuristic(1, 18, 0).is_err());
    }

    #[test]
    fn heuristics_never_beat_oracle() {
        let r = exact_vs_heuristic(10, 12, 7).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.instances.len(), 10);
    }
}
