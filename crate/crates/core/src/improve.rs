//! Local search by size-matched exchanges of small structures.
//!
//! Candidate sets are drawn from a fixed catalog of connected shapes:
//! singletons, runs of in-part degree-two vertices, pendant chains hanging
//! off a leaf, stars, and subdivided stars (a vertex together with the
//! degree-two chains leaving it). Two candidates from opposite sides are
//! exchanged when the exact gain, after padding the smaller one with
//! in-part degree-two vertices, is at least one.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cut::{edges_between, exchange_gain, set_gain_masked, Cut, SetClass, Side};
use crate::graph::Multigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveBudget {
    pub max_set_size: usize,
    pub max_rounds: usize,
    pub rng_seed: u64,
}

impl Default for MoveBudget {
    fn default() -> Self {
        Self { max_set_size: 8, max_rounds: 10_000, rng_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub set: Vec<usize>,
    pub side: Side,
    pub class: SetClass,
}

impl Candidate {
    fn sort_key(&self) -> (i64, usize, usize) {
        (-self.class.gain(), self.set.len(), self.set[0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub gain: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub round: usize,
    pub cut_size: usize,
    pub move_gain: i64,
    pub move_sizes: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub cut: Cut,
    pub rounds: usize,
    pub trace: Vec<TraceEntry>,
}

fn in_part_degrees(g: &Multigraph, c: &Cut) -> Vec<usize> {
    (0..g.n()).map(|v| c.internal_degree(g, v)).collect()
}

fn in_part_neighbors<'a>(g: &'a Multigraph, c: &'a Cut, v: usize) -> impl Iterator<Item = usize> + 'a {
    g.neighbors(v).filter(move |&u| u != v && c.side(u) == c.side(v))
}

/// Maximal runs of in-part degree-two vertices on `side`. Each run is a path
/// in order, or a cycle (flagged) when the run closes on itself.
fn degree_two_runs(g: &Multigraph, c: &Cut, deg: &[usize], side: Side) -> Vec<(Vec<usize>, bool)> {
    let mut seen = vec![false; g.n()];
    let mut runs = Vec::new();
    let is_d2 = |v: usize| c.side(v) == side && deg[v] == 2;
    for start in 0..g.n() {
        if seen[start] || !is_d2(start) {
            continue;
        }
        // walk to one end of the run
        let mut end = start;
        let mut prev = usize::MAX;
        let mut cyclic = false;
        loop {
            let next = in_part_neighbors(g, c, end).find(|&u| u != prev && is_d2(u));
            match next {
                Some(u) if u == start => {
                    cyclic = true;
                    break;
                }
                Some(u) => {
                    prev = end;
                    end = u;
                }
                None => break,
            }
            if end == start {
                cyclic = true;
                break;
            }
        }
        let first = if cyclic { start } else { end };
        let mut run = vec![first];
        seen[first] = true;
        let mut prev = usize::MAX;
        let mut cur = first;
        while let Some(u) = in_part_neighbors(g, c, cur).find(|&u| u != prev && is_d2(u) && !seen[u]) {
            seen[u] = true;
            run.push(u);
            prev = cur;
            cur = u;
        }
        runs.push((run, cyclic));
    }
    runs
}

/// All catalog candidates on `side`, classified and sorted by
/// (gain descending, size ascending, smallest vertex).
pub fn enumerate_candidates(g: &Multigraph, c: &Cut, side: Side, max_set_size: usize) -> Vec<Candidate> {
    let deg = in_part_degrees(g, c);
    let runs = degree_two_runs(g, c, &deg, side);
    enumerate_with(g, c, side, max_set_size, &deg, &runs)
}

fn enumerate_with(
    g: &Multigraph,
    c: &Cut,
    side: Side,
    max: usize,
    deg: &[usize],
    runs: &[(Vec<usize>, bool)],
) -> Vec<Candidate> {
    let max = max.max(1);
    let mut sets: HashSet<Vec<usize>> = HashSet::new();
    let mut add = |mut s: Vec<usize>| {
        s.sort_unstable();
        s.dedup();
        if !s.is_empty() && s.len() <= max {
            sets.insert(s);
        }
    };
    let members: Vec<usize> = c.members(side).collect();

    for &v in &members {
        add(vec![v]);
        // adjacent pairs of low in-part degree
        if deg[v] <= 2 {
            for u in in_part_neighbors(g, c, v) {
                if u > v && deg[u] <= 2 {
                    add(vec![v, u]);
                }
            }
        }
        // stars
        if deg[v] >= 2 {
            let mut s = vec![v];
            s.extend(in_part_neighbors(g, c, v));
            add(s);
        }
    }

    // windows along degree-two runs
    for (run, cyclic) in runs {
        let len = run.len();
        for w in 2..=max.min(len) {
            let starts = if *cyclic && w < len { len } else { len - w + 1 };
            for s in 0..starts {
                add((0..w).map(|k| run[(s + k) % len]).collect());
            }
        }
    }

    // pendant chains: a leaf and the degree-two path leading into the part
    for &v in &members {
        if deg[v] != 1 {
            continue;
        }
        let mut chain = vec![v];
        let mut prev = v;
        let mut cur = in_part_neighbors(g, c, v).next().expect("in-part degree one");
        while chain.len() < max && !chain.contains(&cur) {
            chain.push(cur);
            add(chain.clone());
            if deg[cur] != 2 {
                break;
            }
            let Some(next) = in_part_neighbors(g, c, cur).find(|&u| u != prev) else { break };
            prev = cur;
            cur = next;
        }
    }

    // subdivided stars: a branch vertex with the degree-two chains leaving it
    for &v in &members {
        if deg[v] < 3 {
            continue;
        }
        let mut s = vec![v];
        for first in in_part_neighbors(g, c, v) {
            let mut prev = v;
            let mut cur = first;
            while s.len() <= max && !s.contains(&cur) {
                s.push(cur);
                if deg[cur] != 2 {
                    break;
                }
                let Some(next) = in_part_neighbors(g, c, cur).find(|&u| u != prev) else { break };
                prev = cur;
                cur = next;
            }
        }
        if s.len() <= max {
            add(s);
        }
    }

    let mut mask = vec![false; g.n()];
    let mut out: Vec<Candidate> = sets
        .into_iter()
        .map(|set| {
            set.iter().for_each(|&v| mask[v] = true);
            let gain = set_gain_masked(g, c, &set, |v| mask[v]);
            set.iter().for_each(|&v| mask[v] = false);
            Candidate { set, side, class: SetClass::from_gain(gain) }
        })
        .collect();
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.set.cmp(&b.set)));
    out
}

/// Best possible gain of `d` padding vertices of in-part degree two that are
/// not adjacent to the exchanged sets: a run of `d` has gain `d - 2`.
fn pad_bound(d: usize) -> i64 {
    match d {
        0 => 0,
        1 => -1,
        d => d as i64 - 2,
    }
}

struct Pass<'a> {
    g: &'a Multigraph,
    cut: Cut,
    max: usize,
    /// Flipped during this pass, so cached gains near it are stale.
    dirty: Vec<bool>,
    runs: [Vec<(Vec<usize>, bool)>; 2],
}

impl<'a> Pass<'a> {
    fn near_dirty(&self, set: &[usize]) -> bool {
        set.iter()
            .any(|&v| self.dirty[v] || self.g.neighbors(v).any(|u| self.dirty[u]))
    }

    /// First free stretch of `d` consecutive run vertices on `side`, avoiding
    /// `blocked` and its neighbourhood.
    fn pad(&self, side: Side, d: usize, blocked: &[usize]) -> Option<Vec<usize>> {
        let forbidden = |v: usize| {
            self.dirty[v]
                || blocked.contains(&v)
                || self.g.neighbors(v).any(|u| self.dirty[u] || blocked.contains(&u))
        };
        const MAX_RUNS_SCANNED: usize = 4096;
        for (run, _) in self.runs[side.index()].iter().take(MAX_RUNS_SCANNED) {
            let mut stretch = Vec::with_capacity(d);
            for &v in run {
                if forbidden(v) {
                    stretch.clear();
                } else {
                    stretch.push(v);
                    if stretch.len() == d {
                        return Some(stretch);
                    }
                }
            }
        }
        None
    }

    /// Searches the candidate lists for exchanges, applying each one found
    /// as long as `limit` allows. Returns the exchanges applied.
    fn run(&mut self, a_list: &[Candidate], b_list: &[Candidate], limit: usize) -> Vec<Exchange> {
        let mut applied = Vec::new();
        let mut by_size: Vec<Vec<&Candidate>> = vec![Vec::new(); self.max + 1];
        for b in b_list {
            by_size[b.set.len()].push(b);
        }
        let mut cursor = vec![0usize; self.max + 1];
        let max_b = b_list.first().map_or(i64::MIN / 4, |b| b.class.gain());
        let mut mask2 = vec![false; self.g.n()];

        'outer: for a in a_list {
            if applied.len() >= limit {
                break;
            }
            let ga = a.class.gain();
            if ga + max_b + pad_bound(self.max - 1).max(0) < 1 {
                break;
            }
            if self.near_dirty(&a.set) {
                continue;
            }
            for s in 1..=self.max {
                let bucket = &by_size[s];
                while cursor[s] < bucket.len() && bucket[cursor[s]].set.iter().any(|&v| self.dirty[v]) {
                    cursor[s] += 1;
                }
                let d = a.set.len().abs_diff(s);
                let pb = pad_bound(d);
                for b in &bucket[cursor[s]..] {
                    let gb = b.class.gain();
                    if ga + gb + pb < 1 {
                        break;
                    }
                    if self.near_dirty(&b.set) {
                        continue;
                    }
                    b.set.iter().for_each(|&v| mask2[v] = true);
                    let joined = edges_between(self.g, &a.set, |v| mask2[v]);
                    b.set.iter().for_each(|&v| mask2[v] = false);
                    if ga + gb - 2 * joined + pb < 1 {
                        continue;
                    }
                    let (mut s1, mut s2) = (a.set.clone(), b.set.clone());
                    if d > 0 {
                        let blocked: Vec<usize> = s1.iter().chain(&s2).copied().collect();
                        let (side, target) = if s1.len() < s2.len() { (Side::One, &mut s1) } else { (Side::Two, &mut s2) };
                        match self.pad(side, d, &blocked) {
                            Some(p) => target.extend(p),
                            None => continue,
                        }
                    }
                    let gain = exchange_gain(self.g, &self.cut, &s1, &s2).expect("sets are one-sided and disjoint");
                    if gain < 1 {
                        continue;
                    }
                    for &v in s1.iter().chain(&s2) {
                        self.cut.flip(self.g, v);
                        self.dirty[v] = true;
                    }
                    debug_assert_eq!(self.cut.crossing(), self.cut.recount(self.g));
                    applied.push(Exchange { s1, s2, gain });
                    continue 'outer;
                }
            }
        }
        applied
    }
}

fn new_pass<'a>(g: &'a Multigraph, c: &Cut, max: usize) -> (Pass<'a>, Vec<Candidate>, Vec<Candidate>) {
    let deg = in_part_degrees(g, c);
    let ((runs1, cand1), (runs2, cand2)) = rayon::join(
        || {
            let runs = degree_two_runs(g, c, &deg, Side::One);
            let cands = enumerate_with(g, c, Side::One, max, &deg, &runs);
            (runs, cands)
        },
        || {
            let runs = degree_two_runs(g, c, &deg, Side::Two);
            let cands = enumerate_with(g, c, Side::Two, max, &deg, &runs);
            (runs, cands)
        },
    );
    let pass = Pass {
        g,
        cut: c.clone(),
        max: max.max(1),
        dirty: vec![false; g.n()],
        runs: [runs1, runs2],
    };
    (pass, cand1, cand2)
}

/// First exchange in catalog order whose exact gain is at least one.
pub fn find_improvement(g: &Multigraph, c: &Cut, budget: &MoveBudget) -> Option<Exchange> {
    let (mut pass, a, b) = new_pass(g, c, budget.max_set_size);
    pass.run(&a, &b, 1).pop()
}

/// Applies improvements until none is found or `max_rounds` passes have run.
/// A pass enumerates candidates once and applies every exchange it finds
/// whose sets are untouched by earlier exchanges of the same pass.
pub fn local_search(g: &Multigraph, c: &Cut, budget: &MoveBudget) -> SearchOutcome {
    let mut cut = c.clone();
    let mut trace = Vec::new();
    let mut rounds = 0;
    while rounds < budget.max_rounds {
        rounds += 1;
        let (mut pass, a, b) = new_pass(g, &cut, budget.max_set_size);
        let before = cut.crossing();
        let mut size = before;
        let moves = pass.run(&a, &b, usize::MAX);
        for m in &moves {
            size -= m.gain as usize;
            trace.push(TraceEntry {
                round: rounds,
                cut_size: size,
                move_gain: m.gain,
                move_sizes: [m.s1.len(), m.s2.len()],
            });
        }
        cut = pass.cut;
        debug_assert_eq!(cut.crossing(), size);
        if moves.is_empty() {
            break;
        }
    }
    SearchOutcome { cut, rounds, trace }
}

/// Uniformly random bisection (imbalance `n mod 2`).
pub fn random_bisection(g: &Multigraph, seed: u64) -> Cut {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut in_one = vec![false; g.n()];
    for &v in &order[..g.n() / 2] {
        in_one[v] = true;
    }
    Cut::from_fn(g, |v| in_one[v])
}
