//! Cubic multigraphs and the configuration model.
//!
//! A [`Configuration`] is a perfect matching on `3n` points, point `p` living
//! in bucket `p / 3`. Collapsing buckets into vertices gives a [`Multigraph`]
//! in which loops and parallel edges are kept. Every edge carries a stable id
//! so that cuts and cherries can tell parallel edges apart.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Perfect matching on the `3n` half-edge points of `n` buckets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    n: usize,
    partner: Vec<usize>,
}

impl Configuration {
    /// Builds a configuration from an explicit partner table.
    pub fn from_partner(n: usize, partner: Vec<usize>) -> Result<Self> {
        check_vertex_count(n)?;
        if partner.len() != 3 * n {
            return Err(Error::Domain(format!(
                "partner table has length {}, expected {}",
                partner.len(),
                3 * n
            )));
        }
        for (p, &q) in partner.iter().enumerate() {
            if q >= partner.len() || q == p || partner[q] != p {
                return Err(Error::Domain(format!(
                    "partner table is not a fixed-point-free involution at point {p}"
                )));
            }
        }
        Ok(Self { n, partner })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    pub fn bucket(point: usize) -> usize {
        point / 3
    }

    /// Matched pairs `(p, q)` with `p < q`, ordered by `p`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(p, &q)| p < q)
            .map(|(p, &q)| (p, q))
    }
}

fn check_vertex_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidVertexCount { n, reason: "must be positive" });
    }
    if n % 2 == 1 {
        return Err(Error::InvalidVertexCount { n, reason: "must be even for a cubic graph" });
    }
    Ok(())
}

/// Samples a uniformly random perfect matching of the `3n` points.
pub fn sample_configuration(n: usize, seed: u64) -> Result<Configuration> {
    check_vertex_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..3 * n).collect();
    points.shuffle(&mut rng);
    let mut partner = vec![0; 3 * n];
    for pair in points.chunks_exact(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    Ok(Configuration { n, partner })
}

/// Draws configurations from derived seeds until the resulting graph is simple.
pub fn sample_simple_cubic(n: usize, seed: u64, max_attempts: usize) -> Result<Multigraph> {
    for attempt in 0..max_attempts {
        let c = sample_configuration(n, crate::seed::derive_indexed(seed, "simple", attempt as u64))?;
        let g = to_multigraph(&c);
        if g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::Domain(format!(
        "no simple cubic graph on {n} vertices after {max_attempts} attempts"
    )))
}

/// Collapses buckets into vertices; each matched pair becomes one edge.
pub fn to_multigraph(c: &Configuration) -> Multigraph {
    let edges = c
        .pairs()
        .map(|(p, q)| (Configuration::bucket(p), Configuration::bucket(q)))
        .collect();
    Multigraph::from_edges_unchecked(c.n, edges)
}

/// One end of an edge as seen from a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: usize,
    pub edge: usize,
}

/// Undirected multigraph with stable edge ids. Loops appear twice in the
/// incidence list of their vertex, so they contribute 2 to its degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<Incidence>>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
        }
        Ok(Self::from_edges_unchecked(n, edges))
    }

    fn from_edges_unchecked(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let edges: Vec<(usize, usize)> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            adj[u].push(Incidence { neighbor: v, edge: id });
            adj[v].push(Incidence { neighbor: u, edge: id });
        }
        Self { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn incidences(&self, v: usize) -> &[Incidence] {
        &self.adj[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|i| i.neighbor)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_cubic(&self) -> bool {
        self.adj.iter().all(|a| a.len() == 3)
    }

    /// True iff there are no loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        if self.edges.iter().any(|&(u, v)| u == v) {
            return false;
        }
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Vertices at distance at most `r` from `v`, in BFS order.
    pub fn ball(&self, v: usize, r: usize) -> Result<Vec<usize>> {
        self.check_vertex(v)?;
        let mut out = Vec::new();
        let mut bfs = Bfs::new(self.n);
        bfs.run(self, v, r, |u, _| out.push(u));
        Ok(out)
    }

    /// Number of distinct vertices lying on some cycle of length at most `max_len`.
    /// A loop is a cycle of length 1 and a pair of parallel edges one of length 2.
    pub fn count_short_cycle_vertices(&self, max_len: usize) -> usize {
        if max_len == 0 {
            return 0;
        }
        let mut scratch = CycleScratch::new(self.n);
        (0..self.n)
            .filter(|&v| scratch.on_short_cycle(self, v, max_len))
            .count()
    }

    /// Short-cycle part of typicality: at most `ln n` vertices on cycles of length ≤ 20.
    pub fn is_typical(&self) -> bool {
        const TYPICAL_CYCLE_LEN: usize = 20;
        (self.count_short_cycle_vertices(TYPICAL_CYCLE_LEN) as f64) <= (self.n as f64).ln()
    }

    /// Maximal subgraph of minimum degree ≥ 2, by repeated removal of
    /// vertices of degree 0 or 1.
    pub fn two_core(&self) -> Subgraph {
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut removed = vec![false; self.n];
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| degree[v] <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if removed[v] {
                continue;
            }
            removed[v] = true;
            for inc in &self.adj[v] {
                let u = inc.neighbor;
                if u != v && !removed[u] {
                    degree[u] -= 1;
                    if degree[u] == 1 {
                        queue.push_back(u);
                    }
                }
            }
        }
        self.induced(|v| !removed[v])
    }

    /// Subgraph induced by the vertices accepted by `keep`, relabelled in order.
    pub fn induced(&self, keep: impl Fn(usize) -> bool) -> Subgraph {
        let vertices: Vec<usize> = (0..self.n).filter(|&v| keep(v)).collect();
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u], index[v]))
            .collect();
        Subgraph {
            graph: Self::from_edges_unchecked(vertices.len(), edges),
            vertices,
        }
    }

    /// All cherries: one per unordered pair of incident half-edges at each vertex.
    pub fn cherries(&self) -> Vec<CherryRef> {
        let mut out = Vec::with_capacity(3 * self.n);
        for (center, inc) in self.adj.iter().enumerate() {
            for a in 0..inc.len() {
                for b in a + 1..inc.len() {
                    out.push(CherryRef {
                        center,
                        end1: inc[a].neighbor,
                        end2: inc[b].neighbor,
                        edge1: inc[a].edge,
                        edge2: inc[b].edge,
                    });
                }
            }
        }
        out
    }

    /// Same graph with edges sorted lexicographically and ids reassigned.
    pub fn canonical(&self) -> Self {
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        Self::from_edges_unchecked(self.n, edges)
    }

    /// Canonical edge-list text: header `n m`, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        let mut s = String::with_capacity(8 * edges.len() + 16);
        let _ = writeln!(s, "{} {}", self.n, edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list(std::io::BufReader::new(file))
    }

    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let (n, m) = parse_pair(&header?, line_no)?;
        let mut edges = Vec::with_capacity(m);
        for (line_no, line) in lines {
            let (u, v) = parse_pair(&line?, line_no)?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: 1,
                message: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, edges)
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let bad = |message: String| Error::Parse { line: line_no, message };
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| bad("expected two integers".into()))?;
        tok.parse().map_err(|_| bad(format!("not an integer: {tok:?}")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(bad("trailing tokens".into()));
    }
    Ok((a, b))
}

/// Induced subgraph together with the original ids of its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Multigraph,
    pub vertices: Vec<usize>,
}

/// A path `end1 - center - end2` given by two distinct incident half-edges
/// of `center`. On a loop the two half-edges share an edge id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CherryRef {
    pub center: usize,
    pub end1: usize,
    pub end2: usize,
    pub edge1: usize,
    pub edge2: usize,
}

/// Reusable breadth-first search with generation stamps, so repeated
/// searches from many roots do not clear an `O(n)` array each time.
#[derive(Debug, Clone)]
pub struct Bfs {
    stamp: Vec<u32>,
    generation: u32,
    queue: VecDeque<(usize, usize)>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Self { stamp: vec![0; n], generation: 0, queue: VecDeque::new() }
    }

    fn next_generation(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    /// Calls `visit(u, d)` once for every vertex `u` at distance `d <= radius` from `root`.
    pub fn run(&mut self, g: &Multigraph, root: usize, radius: usize, mut visit: impl FnMut(usize, usize)) {
        self.next_generation();
        let generation = self.generation;
        self.queue.clear();
        self.stamp[root] = generation;
        self.queue.push_back((root, 0));
        while let Some((u, d)) = self.queue.pop_front() {
            visit(u, d);
            if d == radius {
                continue;
            }
            for inc in g.incidences(u) {
                let w = inc.neighbor;
                if self.stamp[w] != generation {
                    self.stamp[w] = generation;
                    self.queue.push_back((w, d + 1));
                }
            }
        }
    }
}

/// BFS from a root where every vertex remembers which root edge its tree
/// path starts with. An edge joining two different branches closes a cycle
/// through the root of length `d(x) + d(y) + 1`, and the shortest cycle
/// through the root is always found this way.
struct CycleScratch {
    stamp: Vec<u32>,
    generation: u32,
    depth: Vec<u32>,
    branch: Vec<usize>,
    parent_edge: Vec<usize>,
    queue: VecDeque<usize>,
}

const ROOT_BRANCH: usize = usize::MAX;

impl CycleScratch {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            generation: 0,
            depth: vec![0; n],
            branch: vec![0; n],
            parent_edge: vec![usize::MAX; n],
            queue: VecDeque::new(),
        }
    }

    fn on_short_cycle(&mut self, g: &Multigraph, root: usize, max_len: usize) -> bool {
        self.generation += 1;
        let generation = self.generation;
        let scan_depth = (max_len - 1) / 2;
        self.queue.clear();
        self.stamp[root] = generation;
        self.depth[root] = 0;
        self.branch[root] = ROOT_BRANCH;
        self.parent_edge[root] = usize::MAX;
        self.queue.push_back(root);
        while let Some(x) = self.queue.pop_front() {
            let dx = self.depth[x] as usize;
            if dx > scan_depth {
                break;
            }
            for inc in g.incidences(x) {
                let (y, e) = (inc.neighbor, inc.edge);
                if e == self.parent_edge[x] {
                    continue;
                }
                if y == x {
                    if x == root {
                        return true;
                    }
                    continue;
                }
                if self.stamp[y] != generation {
                    self.stamp[y] = generation;
                    self.depth[y] = (dx + 1) as u32;
                    self.branch[y] = if x == root { e } else { self.branch[x] };
                    self.parent_edge[y] = e;
                    self.queue.push_back(y);
                } else if self.branch[y] != self.branch[x] || y == root || x == root {
                    // `x == root` with `y` already visited means a parallel root edge.
                    if dx + self.depth[y] as usize + 1 <= max_len {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Small named graphs used in examples and tests.
pub mod named {
    use super::Multigraph;

    pub fn complete4() -> Multigraph {
        Multigraph::from_edges_unchecked(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    pub fn cycle(n: usize) -> Multigraph {
        Multigraph::from_edges_unchecked(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn path(n: usize) -> Multigraph {
        Multigraph::from_edges_unchecked(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// `C_k × K_2`: outer cycle `0..k`, inner cycle `k..2k`, spokes `i – i+k`.
    pub fn prism(k: usize) -> Multigraph {
        let mut edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        edges.extend((0..k).map(|i| (k + i, k + (i + 1) % k)));
        edges.extend((0..k).map(|i| (i, i + k)));
        Multigraph::from_edges_unchecked(2 * k, edges)
    }

    pub fn complete_bipartite33() -> Multigraph {
        let edges = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
        Multigraph::from_edges_unchecked(6, edges)
    }

    pub fn petersen() -> Multigraph {
        let mut edges: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        edges.extend((0..5).map(|i| (5 + i, 5 + (i + 2) % 5)));
        edges.extend((0..5).map(|i| (i, i + 5)));
        Multigraph::from_edges_unchecked(10, edges)
    }

    /// Two vertices joined by three parallel edges.
    pub fn theta2() -> Multigraph {
        Multigraph::from_edges_unchecked(2, vec![(0, 1), (0, 1), (0, 1)])
    }
}
