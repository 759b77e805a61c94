//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{E, LN_2, SQRT_2};

use cubic_bisect::graph::Multigraph;
use cubic_bisect::wave::BorderGraph;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const LN_3: f64 = 1.098_612_288_668_109_8;
pub const LN_6: f64 = LN_2 + LN_3;

// ---------------------------------------------------------------------------
// graphs

/// Minimum crossing count over all balanced partitions, no pruning.
pub fn naive_width(g: &Multigraph) -> usize {
    let n = g.n();
    assert!(n % 2 == 0 && n <= 20);
    let mut best = usize::MAX;
    for mask in 0u32..(1 << n) {
        if mask & 1 == 0 || mask.count_ones() as usize != n / 2 {
            continue;
        }
        let w = g
            .edges()
            .iter()
            .filter(|&&(u, v)| (mask >> u) & 1 != (mask >> v) & 1)
            .count();
        best = best.min(w);
    }
    best
}

/// Random multigraph with `m` uniformly drawn edges (loops allowed).
pub fn random_multigraph(n: usize, m: usize, seed: u64) -> Multigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
    Multigraph::new(n, edges).unwrap()
}

/// Vertices on a cycle of length at most `max_len`, by enumerating simple
/// cycles over edge ids from their smallest vertex.
pub fn brute_cycle_vertices(g: &Multigraph, max_len: usize) -> Vec<bool> {
    let n = g.n();
    let mut on = vec![false; n];
    let mut used_edge = vec![false; g.m()];
    let mut on_path = vec![false; n];
    fn go(
        g: &Multigraph,
        start: usize,
        v: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        used_edge: &mut [bool],
        on: &mut [bool],
        max_len: usize,
    ) {
        for inc in g.incidences(v) {
            let e = inc.edge;
            if used_edge[e] {
                continue;
            }
            let w = inc.neighbor;
            if w == start {
                if path.len() <= max_len {
                    for &p in path.iter() {
                        on[p] = true;
                    }
                }
                continue;
            }
            if w < start || on_path[w] || path.len() >= max_len {
                continue;
            }
            used_edge[e] = true;
            on_path[w] = true;
            path.push(w);
            go(g, start, w, path, on_path, used_edge, on, max_len);
            path.pop();
            on_path[w] = false;
            used_edge[e] = false;
        }
    }
    for s in 0..n {
        on_path[s] = true;
        let mut path = vec![s];
        go(g, s, s, &mut path, &mut on_path, &mut used_edge, &mut on, max_len);
        on_path[s] = false;
    }
    on
}

/// Repeatedly drop every vertex of degree at most one, all at once.
pub fn naive_two_core(g: &Multigraph) -> Vec<usize> {
    let mut alive = vec![true; g.n()];
    loop {
        let mut deg = vec![0usize; g.n()];
        for &(u, v) in g.edges() {
            if alive[u] && alive[v] {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        let drop: Vec<usize> = (0..g.n()).filter(|&v| alive[v] && deg[v] <= 1).collect();
        if drop.is_empty() {
            break;
        }
        for v in drop {
            alive[v] = false;
        }
    }
    (0..g.n()).filter(|&v| alive[v]).collect()
}

/// Random bipartite graph of maximum degree two on the given sides.
pub fn random_border_graph(a: usize, b: usize, tries: usize, seed: u64) -> BorderGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side1: Vec<usize> = (0..a).collect();
    let side2: Vec<usize> = (a..a + b).collect();
    let mut deg = vec![0usize; a + b];
    let mut edges = Vec::new();
    if a > 0 && b > 0 {
        for _ in 0..tries {
            let x = rng.random_range(0..a);
            let y = a + rng.random_range(0..b);
            if deg[x] < 2 && deg[y] < 2 {
                deg[x] += 1;
                deg[y] += 1;
                edges.push((x, y));
            }
        }
    }
    BorderGraph::new(side1, side2, edges).unwrap()
}

pub fn is_independent(h: &BorderGraph, i1: &[usize], i2: &[usize]) -> bool {
    h.edges.iter().all(|(a, b)| !(i1.contains(a) && i2.contains(b)))
}

/// Largest `|I1| + |I2|` over independent sets, and whether some
/// independent set meets both `⌈·/2⌉ − 1` targets. Side-two vertices have
/// no edges among themselves, so for each subset of side one the best
/// completion takes every side-two vertex without a chosen neighbour.
pub fn exhaustive_independent(h: &BorderGraph) -> (usize, bool) {
    let a = h.side1.len();
    assert!(a <= 16);
    let target = |k: usize| k.div_ceil(2).saturating_sub(1);
    let (t1, t2) = (target(a), target(h.side2.len()));
    let mut best = 0;
    let mut feasible = false;
    for mask in 0u32..(1 << a) {
        let chosen = |v: usize| h.side1.iter().position(|&x| x == v).is_some_and(|i| (mask >> i) & 1 == 1);
        let free2 = h
            .side2
            .iter()
            .filter(|&&y| !h.edges.iter().any(|&(x, yy)| yy == y && chosen(x)))
            .count();
        let k1 = mask.count_ones() as usize;
        best = best.max(k1 + free2);
        feasible |= k1 >= t1 && free2 >= t2;
    }
    (best, feasible)
}

// ---------------------------------------------------------------------------
// trees

/// Covariance of `Σ_{d(w,x) ≤ R} σ_{d(w,x)} Z_w` at two vertices at distance
/// `d`, computed on an explicit piece of the 3-regular tree.
pub fn explicit_tree_covariance(radius: usize, d: usize, sigma: &[f64]) -> f64 {
    // vertex 0 is the root; children listed per vertex
    let depth = radius + d;
    let mut parent = vec![usize::MAX];
    let mut level = vec![0usize];
    let mut frontier = vec![0usize];
    for l in 1..=depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let kids = if v == 0 { 3 } else { 2 };
            for _ in 0..kids {
                parent.push(v);
                level.push(l);
                next.push(parent.len() - 1);
            }
        }
        frontier = next;
    }
    let n = parent.len();
    let mut adj = vec![Vec::new(); n];
    for v in 1..n {
        adj[v].push(parent[v]);
        adj[parent[v]].push(v);
    }
    let dist_from = |s: usize| {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    };
    // the second vertex: follow first children d times
    let mut v = 0;
    for _ in 0..d {
        v = adj[v].iter().copied().find(|&w| w != parent[v] && level[w] > level[v]).unwrap();
    }
    let (du, dv) = (dist_from(0), dist_from(v));
    (0..n)
        .filter(|&w| du[w] <= radius && dv[w] <= radius)
        .map(|w| sigma[du[w]] * sigma[dv[w]])
        .sum()
}

// ---------------------------------------------------------------------------
// seven-variable orthant

/// The covariance matrix as printed, entry by entry.
pub fn printed_b() -> DMatrix<f64> {
    let a = 5.0 / 6.0;
    let b = 2.0 * SQRT_2 / 3.0;
    let c = 1.0 / SQRT_2;
    let d = 7.0 / 12.0;
    #[rustfmt::skip]
    let rows = [
        1.0, a, b, -a, c, d, d,
        a, 1.0, b, -a, c, d, d,
        b, b, 1.0, -b, a, c, c,
        -a, -a, -b, 1.0, -b, -a, -a,
        c, c, a, -b, 1.0, b, b,
        d, d, c, -a, b, 1.0, a,
        d, d, c, -a, b, a, 1.0,
    ];
    DMatrix::from_row_slice(7, 7, &rows)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `P(V Z > 0)` for a factor `V` with a column that is nonzero in every
/// row: that coordinate is integrated exactly, the rest by sampling.
/// Returns (estimate, standard error).
pub fn conditional_orthant(v: &DMatrix<f64>, samples: usize, seed: u64) -> (f64, f64) {
    let cols = v.ncols();
    let pivot = (0..cols)
        .max_by(|&i, &j| {
            let mi = v.column(i).amin();
            let mj = v.column(j).amin();
            mi.total_cmp(&mj)
        })
        .unwrap();
    assert!(v.column(pivot).amin() > 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    let mut z = vec![0.0; cols];
    for _ in 0..samples {
        z.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for r in 0..v.nrows() {
            let rest: f64 = (0..cols).filter(|&j| j != pivot).map(|j| v[(r, j)] * z[j]).sum();
            let bound = -rest / v[(r, pivot)];
            if v[(r, pivot)] > 0.0 {
                lo = lo.max(bound);
            } else {
                hi = hi.min(bound);
            }
        }
        let p = if hi > lo { normal_cdf(hi) - normal_cdf(lo) } else { 0.0 };
        sum += p;
        sq += p * p;
    }
    let mean = sum / samples as f64;
    let var = sq / samples as f64 - mean * mean;
    (mean, (var / samples as f64).sqrt())
}

// ---------------------------------------------------------------------------
// finite-n counting formulas

pub fn lf(x: f64) -> f64 {
    libm::lgamma(x + 1.0)
}

pub fn lbinom(a: f64, b: f64) -> f64 {
    lf(a) - lf(b) - lf(a - b)
}

/// `x!!` for odd `x`, continued to real arguments.
pub fn ldfact(x: f64) -> f64 {
    let m = (x + 1.0) / 2.0;
    lf(2.0 * m) - m * LN_2 - lf(m)
}

/// Log of the expected number of type-one bisections at size `n`, with the
/// optimal path lengths plugged in.
pub fn type1_log_count(n: f64, b: f64, t: f64) -> f64 {
    let r = (2.0 * b - t) / b;
    let c = (t - b) * (t - b) / (2.0 * b - t);
    let mut paths = 0.0;
    let mut i = 1;
    loop {
        let ti = c * r.powi(i) * n;
        if ti < 1e-300 {
            break;
        }
        paths += ti * LN_2 + lf(ti);
        i += 1;
    }
    lbinom(n, n / 2.0) + 2.0 * lbinom(n / 2.0, b * n) + 2.0 * lf(b * n)
        + lbinom((0.5 - b) * n, t * n)
        + lf(t * n)
        + ldfact((1.5 - 5.0 * b) * n)
        - 2.0 * (t - b) * n * LN_2
        - (0.5 - b - t) * n * LN_6
        + ldfact((1.5 - b) * n)
        - b * n * LN_2
        - (0.5 - b) * n * LN_6
        + n * LN_6
        - paths
        - ldfact(3.0 * n - 1.0)
}

/// One structure family of a type-two side: density per vertex and the log
/// of its extra automorphism/weight factor.
struct Family {
    density: f64,
    extra: f64,
    is_path: bool,
    is_triple: bool,
    weight: f64,
}

/// The displayed Lagrange solutions, literally: `x_{j,i}` carries `/(4e)`
/// off-centre and `/(8e)` at the centre with multiplier `mu`.
fn type2_families(beta: f64, mu: f64, lam3: f64) -> (Vec<Family>, f64, f64, f64) {
    const M: usize = 90;
    let mut raw = Vec::new();
    for i in 1..M {
        raw.push(((lam3 * i as f64).exp() / (8.0 * E), LN_2, false, false, i as f64));
        for j in 1..=(i + 1) / 2 {
            let centre = 2 * j == i + 1;
            let den = if centre { 8.0 } else { 4.0 };
            let extra = if centre { LN_2 } else { 0.0 };
            raw.push(((mu + lam3 * (i + 1) as f64).exp() / (den * E), extra, true, false, (i + 1) as f64));
        }
    }
    let top = M / 3 + 2;
    for i in 1..top {
        for j in i..top {
            for l in j..top {
                let (den, extra) = if i == j && j == l {
                    (48.0, LN_6)
                } else if i == j || j == l {
                    (16.0, LN_2)
                } else {
                    (8.0, 0.0)
                };
                let w = (i + j + l) as f64;
                raw.push(((lam3 * w).exp() / (den * E), extra, false, true, w));
            }
        }
    }
    let weight: f64 = raw.iter().map(|r| r.0 * r.4).sum();
    let scale = beta / weight;
    let fams: Vec<Family> = raw
        .into_iter()
        .map(|(v, extra, is_path, is_triple, w)| Family { density: v * scale, extra, is_path, is_triple, weight: w })
        .collect();
    let t = fams.iter().map(|f| f.density).sum();
    let k = fams.iter().filter(|f| f.is_path).map(|f| f.density).sum();
    let y = fams.iter().filter(|f| f.is_triple).map(|f| f.density).sum();
    (fams, t, k, y)
}

fn type2_side_log(n: f64, beta: f64, mu: f64, lam3: f64) -> (f64, f64) {
    let (fams, t, k, y) = type2_families(beta, mu, lam3);
    let aut: f64 = fams.iter().map(|f| n * f.density * f.extra + lf(n * f.density)).sum();
    let ell = 2.0 * t + y;
    let b = beta;
    let v = lbinom(n / 2.0, b * n) + lf(b * n) - aut - ell * n * LN_2
        + lbinom((0.5 - b) * n, (b + t - k) * n)
        + lf((b + t - k) * n)
        + ldfact((1.5 - 5.0 * b + 2.0 * k) * n)
        - (0.5 - 2.0 * b - (t - k)) * n * LN_6
        + 0.5 * lf(b * n);
    (v, k)
}

/// Log of the expected number of type-two bisections at size `n`, from the
/// final product formula with the literal Lagrange families.
pub fn type2_log_count(n: f64, b1: f64, b2: f64, side1: (f64, f64), side2: (f64, f64)) -> f64 {
    let (s1, k1) = type2_side_log(n, b1, side1.0, side1.1);
    let (s2, k2) = type2_side_log(n, b2, side2.0, side2.1);
    let (h1, h2) = (k1 * n / 2.0, k2 * n / 2.0);
    lbinom(n, n / 2.0) + s1 + s2 + n * LN_6 - ldfact(3.0 * n - 1.0) - lbinom(h1 + h2 - 3.0, h1 - 1.0)
}

/// Limit of `f(n)/n` from `f(n)/n = e + Σ_{k ≤ degree} c_k (ln n)^k / n`
/// fitted at `n0·2^j`, `j = 0..=degree+1`.
pub fn extrapolate(f: impl Fn(f64) -> f64, n0: f64, degree: usize) -> f64 {
    let pts = degree + 2;
    let ns: Vec<f64> = (0..pts).map(|j| n0 * 2f64.powi(j as i32)).collect();
    let a = DMatrix::from_fn(pts, pts, |r, c| {
        if c == 0 {
            1.0
        } else {
            ns[r].ln().powi(c as i32 - 1) / ns[r]
        }
    });
    let y = DVector::from_iterator(pts, ns.iter().map(|&n| f(n) / n));
    a.lu().solve(&y).expect("nonsingular fit")[0]
}
