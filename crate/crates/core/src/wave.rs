//! Gaussian wave cuts.
//!
//! The field is `X_v = Σ_{i≤R} σ_i Σ_{d(u,v)=i} Z_u` for iid standard normal
//! `Z`, where `σ` solves `3σ₁ = λσ₀`, `2σ_{k+1} = λσ_k − σ_{k−1}` with
//! `σ₀ = 1`. Splitting by sign gives a cut; the refinement stage then
//! switches centers of border cherries (a center whose sign differs from
//! both ends) that can be moved without conflicts.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::{repair_balance, Cut, Side};
use crate::error::{Error, Result};
use crate::graph::{Bfs, CherryRef, Multigraph};
use crate::improve::{local_search, MoveBudget, TraceEntry};
use crate::seed;

pub const LAMBDA_DEFAULT: f64 = 2.0 * SQRT_2;

pub fn sigma(k: usize, lambda: f64) -> f64 {
    sigma_table(k, lambda)[k]
}

/// `σ_0..=σ_k`.
pub fn sigma_table(k: usize, lambda: f64) -> Vec<f64> {
    let mut s = Vec::with_capacity(k + 1);
    s.push(1.0);
    if k >= 1 {
        s.push(lambda / 3.0);
    }
    for i in 1..k {
        s.push((lambda * s[i] - s[i - 1]) / 2.0);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub lambda: f64,
    pub radius: usize,
    pub seed: u64,
}

impl WaveParams {
    /// `λ = 2√2` and radius `max(2, ⌊ln ln n⌋)`.
    pub fn for_n(n: usize, seed: u64) -> Self {
        Self { lambda: LAMBDA_DEFAULT, radius: default_radius(n), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.abs() <= 3.0) {
            return Err(Error::Domain(format!("lambda {} outside [-3, 3]", self.lambda)));
        }
        Ok(())
    }
}

pub fn default_radius(n: usize) -> usize {
    let lnln = (n.max(3) as f64).ln().ln();
    (lnln.floor().max(0.0) as usize).max(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub values: Vec<f64>,
    pub params: WaveParams,
}

impl WaveField {
    pub fn positive(&self, v: usize) -> bool {
        self.values[v] >= 0.0
    }
}

/// The iid normals driving the field, one per vertex.
pub fn field_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, "field"));
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn wave_field(g: &Multigraph, p: &WaveParams) -> Result<WaveField> {
    p.validate()?;
    let z = field_noise(g.n(), p.seed);
    let sig = sigma_table(p.radius, p.lambda);
    let values = (0..g.n())
        .into_par_iter()
        .map_init(
            || Bfs::new(g.n()),
            |bfs, v| {
                let mut x = 0.0;
                bfs.run(g, v, p.radius, |u, d| x += sig[d] * z[u]);
                x
            },
        )
        .collect();
    Ok(WaveField { values, params: *p })
}

/// Covariance of the truncated field at two vertices of the 3-regular tree
/// at distance `d`. A vertex hanging at height `h` off the path between
/// them contributes `σ_{p+h} σ_{d−p+h}`; path endpoints carry `2^h` such
/// vertices per height, interior path vertices `2^{h−1}`.
pub fn tree_covariance(radius: usize, d: usize, lambda: f64) -> f64 {
    let s = sigma_table(radius + d, lambda);
    let mut total = 0.0;
    for p in 0..=d {
        let (a, b) = (p, d - p);
        for h in 0..=radius {
            if a + h > radius || b + h > radius {
                break;
            }
            let count = match (h, d) {
                (0, _) => 1.0,
                (_, 0) => 3.0 * 2f64.powi(h as i32 - 1),
                _ if p == 0 || p == d => 2f64.powi(h as i32),
                _ => 2f64.powi(h as i32 - 1),
            };
            total += count * s[a + h] * s[b + h];
        }
    }
    total
}

pub fn tree_correlation(radius: usize, d: usize, lambda: f64) -> f64 {
    tree_covariance(radius, d, lambda) / tree_covariance(radius, 0, lambda)
}

/// Side one is `X_v ≥ 0`.
pub fn sign_cut(g: &Multigraph, f: &WaveField) -> Cut {
    Cut::from_fn(g, |v| f.positive(v))
}

/// Sign-pattern probabilities of a cherry `(v₁, v, v₂)` when the ends have
/// correlation `r1` with the center and `r2` with each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthantTrio {
    /// All three signs equal.
    pub p_same: f64,
    /// Exactly one end differs from the rest.
    pub p_one: f64,
    /// The center differs from both ends.
    pub p_border: f64,
}

pub fn orthant_trio(r1: f64, r2: f64) -> Result<OrthantTrio> {
    for r in [r1, r2] {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("correlation {r} outside [-1, 1]")));
        }
    }
    let q = |s: f64| 0.125 + s / (4.0 * PI);
    Ok(OrthantTrio {
        p_same: 2.0 * q(2.0 * r1.asin() + r2.asin()),
        p_one: 4.0 * q(r1.asin() + (-r1).asin() + (-r2).asin()),
        p_border: 2.0 * q(2.0 * (-r1).asin() + r2.asin()),
    })
}

pub fn cherry_orthant_probs(lambda: f64) -> Result<OrthantTrio> {
    let s = sigma_table(2, lambda);
    orthant_trio(s[1], s[2])
}

/// Expected crossing edges per vertex of the sign cut: each of the `3n`
/// cherries has `p_one + 2 p_border` crossing edges on average and every
/// edge lies in four cherries.
pub fn rate_from_trio(t: &OrthantTrio) -> f64 {
    (t.p_one + 2.0 * t.p_border) * 0.75
}

pub fn lyons_rate(lambda: f64) -> Result<f64> {
    Ok(rate_from_trio(&cherry_orthant_probs(lambda)?))
}

/// Orthant quantities with the truncated-field correlations at radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteRadiusPrediction {
    pub radius: usize,
    pub r1: f64,
    pub r2: f64,
    pub trio: OrthantTrio,
    pub cut_rate: f64,
}

pub fn finite_radius_prediction(radius: usize, lambda: f64) -> Result<FiniteRadiusPrediction> {
    let r1 = tree_correlation(radius, 1, lambda);
    let r2 = tree_correlation(radius, 2, lambda);
    let trio = orthant_trio(r1, r2)?;
    Ok(FiniteRadiusPrediction { radius, r1, r2, trio, cut_rate: rate_from_trio(&trio) })
}

fn is_border(c: &Cut, ch: &CherryRef) -> bool {
    let s = c.side(ch.center);
    c.side(ch.end1) != s && c.side(ch.end2) != s
}

pub fn border_cherries(g: &Multigraph, f: &WaveField) -> Vec<CherryRef> {
    border_cherries_of_cut(g, &sign_cut(g, f))
}

pub fn border_cherries_of_cut(g: &Multigraph, c: &Cut) -> Vec<CherryRef> {
    g.cherries().into_iter().filter(|ch| is_border(c, ch)).collect()
}

/// Bipartite graph on the centers of border cherries, with the crossing
/// edges between them. Parallel edges are kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorderGraph {
    pub side1: Vec<usize>,
    pub side2: Vec<usize>,
    /// `(a, b)` with `a` in `side1` and `b` in `side2`.
    pub edges: Vec<(usize, usize)>,
}

impl BorderGraph {
    /// Checks bipartiteness, disjointness of the sides and maximum degree two.
    pub fn new(side1: Vec<usize>, side2: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let h = Self { side1, side2, edges };
        h.validate()?;
        Ok(h)
    }

    fn side_map(&self) -> Result<HashMap<usize, Side>> {
        let mut map = HashMap::with_capacity(self.side1.len() + self.side2.len());
        for (list, side) in [(&self.side1, Side::One), (&self.side2, Side::Two)] {
            for &v in list {
                if map.insert(v, side).is_some() {
                    return Err(Error::InvalidBorderGraph(format!("vertex {v} listed twice")));
                }
            }
        }
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        let map = self.side_map()?;
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &self.edges {
            if map.get(&a) != Some(&Side::One) || map.get(&b) != Some(&Side::Two) {
                return Err(Error::InvalidBorderGraph(format!("edge ({a}, {b}) does not join side1 to side2")));
            }
            for v in [a, b] {
                let d = degree.entry(v).or_default();
                *d += 1;
                if *d > 2 {
                    return Err(Error::InvalidBorderGraph(format!("vertex {v} has degree above 2")));
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn degrees(&self) -> HashMap<usize, usize> {
        let mut d: HashMap<usize, usize> = self.side1.iter().chain(&self.side2).map(|&v| (v, 0)).collect();
        for &(a, b) in &self.edges {
            *d.get_mut(&a).expect("validated") += 1;
            *d.get_mut(&b).expect("validated") += 1;
        }
        d
    }

    pub fn isolated(&self) -> Vec<usize> {
        let d = self.degrees();
        let mut out: Vec<usize> = self.side1.iter().chain(&self.side2).copied().filter(|v| d[v] == 0).collect();
        out.sort_unstable();
        out
    }

    pub fn without_isolated(&self) -> Self {
        let d = self.degrees();
        Self {
            side1: self.side1.iter().copied().filter(|v| d[v] > 0).collect(),
            side2: self.side2.iter().copied().filter(|v| d[v] > 0).collect(),
            edges: self.edges.clone(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().values().copied().max().unwrap_or(0)
    }
}

pub fn build_border_graph(g: &Multigraph, f: &WaveField) -> BorderGraph {
    build_border_graph_of_cut(g, &sign_cut(g, f))
}

/// Keeps centers of exactly one border cherry. Such a center has exactly two
/// crossing edges, so the result has maximum degree two.
pub fn build_border_graph_of_cut(g: &Multigraph, c: &Cut) -> BorderGraph {
    let mut count = vec![0u8; g.n()];
    for ch in border_cherries_of_cut(g, c) {
        count[ch.center] = count[ch.center].saturating_add(1);
    }
    let keep = |v: usize| count[v] == 1;
    let side1: Vec<usize> = (0..g.n()).filter(|&v| keep(v) && c.side(v) == Side::One).collect();
    let side2: Vec<usize> = (0..g.n()).filter(|&v| keep(v) && c.side(v) == Side::Two).collect();
    let edges = g
        .edges()
        .iter()
        .filter(|&&(u, v)| u != v && keep(u) && keep(v) && c.side(u) != c.side(v))
        .map(|&(u, v)| if c.side(u) == Side::One { (u, v) } else { (v, u) })
        .collect();
    BorderGraph { side1, side2, edges }
}

/// `⌈k/2⌉ − 1`, floored at zero.
pub fn split_target(k: usize) -> usize {
    k.div_ceil(2).saturating_sub(1)
}

/// Independent set with at least `⌈|side|/2⌉ − 1` vertices on each side.
///
/// Paths with an odd number of edges are closed into cycles. Paths with an
/// even number of edges have both ends on one side; calling them `p` (ends
/// on side A) and `q` (ends on side B), with A the side owning more of them,
/// all `q` paths and the longest `p` paths are chained alternately into one
/// cycle, leaving the `k = #p − #q` shortest `p` paths free. Side A vertices
/// are then taken from the free paths first when that does not overshoot
/// the target, and from the cycles otherwise, and every side B vertex with
/// no chosen neighbour is added. Isolated vertices always join the set.
pub fn independent_split(h: &BorderGraph) -> Result<(Vec<usize>, Vec<usize>)> {
    h.validate()?;
    let map = h.side_map()?;
    let verts: Vec<usize> = h.side1.iter().chain(&h.side2).copied().collect();
    let index: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nv = verts.len();
    let side_of = |i: usize| map[&verts[i]];

    // local adjacency with edge ids
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (e, &(a, b)) in h.edges.iter().enumerate() {
        let (ia, ib) = (index[&a], index[&b]);
        adj[ia].push((ib, e));
        adj[ib].push((ia, e));
    }

    let mut chosen = vec![false; nv];
    let mut visited = vec![false; nv];
    for i in 0..nv {
        if adj[i].is_empty() {
            chosen[i] = true;
            visited[i] = true;
        }
    }

    let walk = |start: usize, first_edge: usize, visited: &mut [bool]| -> Vec<usize> {
        let mut seq = vec![start];
        visited[start] = true;
        let (mut cur, mut via) = (start, first_edge);
        loop {
            let &(next, _) = adj[cur].iter().find(|&&(_, e)| e == via).expect("edge incident");
            if next == start {
                break;
            }
            visited[next] = true;
            seq.push(next);
            match adj[next].iter().find(|&&(_, e)| e != via) {
                Some(&(_, e)) => {
                    cur = next;
                    via = e;
                }
                None => break,
            }
        }
        seq
    };

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut p_paths: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
    for i in 0..nv {
        if !visited[i] && adj[i].len() == 1 {
            let path = walk(i, adj[i][0].1, &mut visited);
            if path.len() % 2 == 0 {
                cycles.push(path);
            } else {
                p_paths[side_of(path[0]).index()].push(path);
            }
        }
    }
    for i in 0..nv {
        if !visited[i] {
            cycles.push(walk(i, adj[i][0].1, &mut visited));
        }
    }

    let a = if p_paths[0].len() >= p_paths[1].len() { Side::One } else { Side::Two };
    let [mut pa, mut pb] = if a == Side::One {
        let [x, y] = p_paths;
        [x, y]
    } else {
        let [x, y] = p_paths;
        [y, x]
    };
    pa.sort_by_key(|p| (p.len(), p[0]));
    pb.sort_by_key(|p| (p.len(), p[0]));
    let k = pa.len() - pb.len();
    let free = pa[..k].to_vec();
    if !pb.is_empty() {
        let mut chain = Vec::new();
        for (p, q) in pa[k..].iter().zip(&pb) {
            chain.extend(p.iter().copied());
            chain.extend(q.iter().copied());
        }
        cycles.push(chain);
    }
    // extra (virtual) adjacency from closing paths and chaining
    let mut nbrs: Vec<Vec<usize>> = adj.iter().map(|l| l.iter().map(|&(u, _)| u).collect()).collect();
    for c in &cycles {
        let (first, last) = (c[0], c[c.len() - 1]);
        if c.len() >= 2 && !nbrs[first].contains(&last) {
            nbrs[first].push(last);
            nbrs[last].push(first);
        }
    }
    // the chain is closed at every joint
    if !pb.is_empty() {
        let chain = cycles.last().expect("chain pushed");
        for w in chain.windows(2) {
            if !nbrs[w[0]].contains(&w[1]) {
                nbrs[w[0]].push(w[1]);
                nbrs[w[1]].push(w[0]);
            }
        }
    }

    let non_isolated_a = (0..nv).filter(|&i| !adj[i].is_empty() && side_of(i) == a).count();
    let target = split_target(non_isolated_a);
    let free_a: usize = free.iter().map(|p| p.len().div_ceil(2)).sum();
    let mut taken = 0;
    let take = |i: usize, chosen: &mut [bool], taken: &mut usize| {
        if *taken < target {
            chosen[i] = true;
            *taken += 1;
        }
    };
    if free_a <= target {
        for p in &free {
            for &i in p.iter().step_by(2) {
                take(i, &mut chosen, &mut taken);
            }
        }
        for c in &cycles {
            let offset = if side_of(c[0]) == a { 0 } else { 1 };
            for &i in c.iter().skip(offset).step_by(2) {
                take(i, &mut chosen, &mut taken);
            }
        }
    } else {
        for p in &free {
            for &i in p.iter().step_by(2) {
                take(i, &mut chosen, &mut taken);
            }
        }
    }
    // every B vertex outside the neighbourhood of the chosen A vertices
    for i in 0..nv {
        if !adj[i].is_empty() && side_of(i) != a && !nbrs[i].iter().any(|&u| chosen[u]) {
            chosen[i] = true;
        }
    }

    let mut i1 = Vec::new();
    let mut i2 = Vec::new();
    for i in 0..nv {
        if chosen[i] {
            match side_of(i) {
                Side::One => i1.push(verts[i]),
                Side::Two => i2.push(verts[i]),
            }
        }
    }
    i1.sort_unstable();
    i2.sort_unstable();
    Ok((i1, i2))
}

/// Flips the isolated vertices of `h` one at a time, keeping only flips
/// that strictly reduce the crossing count.
pub fn isolated_switch(g: &Multigraph, c: &Cut, h: &BorderGraph) -> Cut {
    let mut out = c.clone();
    for v in h.isolated() {
        let before = out.crossing();
        out.flip(g, v);
        if out.crossing() >= before {
            out.flip(g, v);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub crossing: usize,
    pub balance: usize,
}

#[derive(Debug, Clone)]
pub struct WaveOutcome {
    pub cut: Cut,
    pub stages: Vec<StageRecord>,
    pub search_trace: Vec<TraceEntry>,
    pub border_sizes: (usize, usize),
    pub independent_sizes: (usize, usize),
}

/// Sign cut, isolated-center switch, independent-set swap, balance repair,
/// then local search. The result is a bisection (imbalance `n mod 2`).
pub fn wave_bisect(g: &Multigraph, p: &WaveParams, budget: &MoveBudget) -> Result<WaveOutcome> {
    let f = wave_field(g, p)?;
    let mut stages = Vec::new();
    let mut log = |name: &str, c: &Cut| {
        stages.push(StageRecord { stage: name.to_string(), crossing: c.crossing(), balance: c.imbalance() })
    };

    let c0 = sign_cut(g, &f);
    log("sign", &c0);
    let h0 = build_border_graph_of_cut(g, &c0);
    let c1 = isolated_switch(g, &c0, &h0);
    log("isolated", &c1);

    let h1 = build_border_graph_of_cut(g, &c1).without_isolated();
    let (i1, i2) = independent_split(&h1)?;
    let m = i1.len().min(i2.len());
    let mut c2 = c1.clone();
    for &v in i1[..m].iter().chain(&i2[..m]) {
        c2.flip(g, v);
    }
    log("swap", &c2);

    let c3 = repair_balance(g, &c2, 0);
    log("repair", &c3);
    let search = local_search(g, &c3, budget);
    log("local", &search.cut);

    Ok(WaveOutcome {
        cut: search.cut,
        stages,
        search_trace: search.trace,
        border_sizes: (h0.side1.len(), h0.side2.len()),
        independent_sizes: (i1.len(), i2.len()),
    })
}
