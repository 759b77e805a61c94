//! Two-sided cuts and the exchange calculus.
//!
//! Moving a one-sided set `S` across the cut changes the crossing count by
//! `-(gain)`, where each `v ∈ S` contributes its crossing degree minus the
//! number of its same-side edges leaving `S`. Loops never cross and parallel
//! edges count with multiplicity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Multigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn label(self) -> char {
        match self {
            Side::One => '1',
            Side::Two => '2',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    sides: Vec<Side>,
    crossing: usize,
    counts: [usize; 2],
}

/// Full recount of crossing edges.
pub fn cut_size(g: &Multigraph, sides: &[Side]) -> usize {
    g.edges().iter().filter(|&&(u, v)| sides[u] != sides[v]).count()
}

impl Cut {
    pub fn new(g: &Multigraph, sides: Vec<Side>) -> Result<Self> {
        if sides.len() != g.n() {
            return Err(Error::CutSizeMismatch { expected: g.n(), got: sides.len() });
        }
        let crossing = cut_size(g, &sides);
        let ones = sides.iter().filter(|&&s| s == Side::One).count();
        Ok(Self { counts: [ones, sides.len() - ones], sides, crossing })
    }

    /// Side one gets the vertices for which `in_one` holds.
    pub fn from_fn(g: &Multigraph, in_one: impl Fn(usize) -> bool) -> Self {
        let sides = (0..g.n()).map(|v| if in_one(v) { Side::One } else { Side::Two }).collect();
        Self::new(g, sides).expect("length matches by construction")
    }

    /// Parses the `'1'`/`'2'` line format.
    pub fn parse(g: &Multigraph, line: &str) -> Result<Self> {
        let sides = line.trim().parse::<SideString>()?.0;
        Self::new(g, sides)
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn side(&self, v: usize) -> Side {
        self.sides[v]
    }

    pub fn n(&self) -> usize {
        self.sides.len()
    }

    pub fn crossing(&self) -> usize {
        self.crossing
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.counts[0], self.counts[1])
    }

    pub fn imbalance(&self) -> usize {
        self.counts[0].abs_diff(self.counts[1])
    }

    pub fn is_bisection(&self, slack: usize) -> bool {
        self.imbalance() <= slack
    }

    pub fn members(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        self.sides.iter().enumerate().filter(move |&(_, &s)| s == side).map(|(v, _)| v)
    }

    /// Non-loop incidences of `v` going to the other side.
    pub fn crossing_degree(&self, g: &Multigraph, v: usize) -> usize {
        g.incidences(v)
            .iter()
            .filter(|i| i.neighbor != v && self.sides[i.neighbor] != self.sides[v])
            .count()
    }

    /// Non-loop incidences of `v` staying on its side.
    pub fn internal_degree(&self, g: &Multigraph, v: usize) -> usize {
        g.incidences(v)
            .iter()
            .filter(|i| i.neighbor != v && self.sides[i.neighbor] == self.sides[v])
            .count()
    }

    /// Moves `v` to the other side, updating the cached crossing count.
    pub fn flip(&mut self, g: &Multigraph, v: usize) {
        let before = self.crossing_degree(g, v);
        let after = self.internal_degree(g, v);
        self.crossing = self.crossing + after - before;
        self.counts[self.sides[v].index()] -= 1;
        self.sides[v] = self.sides[v].other();
        self.counts[self.sides[v].index()] += 1;
    }

    pub fn recount(&self, g: &Multigraph) -> usize {
        cut_size(g, &self.sides)
    }

    pub fn to_line(&self) -> String {
        self.sides.iter().map(|s| s.label()).collect()
    }

    pub fn record(&self) -> CutRecord {
        CutRecord {
            n: self.n(),
            crossing: self.crossing,
            counts: self.counts,
            sides: self.to_line(),
        }
    }
}

/// JSON form of a cut.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRecord {
    pub n: usize,
    pub crossing: usize,
    pub counts: [usize; 2],
    pub sides: String,
}

struct SideString(Vec<Side>);

impl FromStr for SideString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, ch)| match ch {
                '1' => Ok(Side::One),
                '2' => Ok(Side::Two),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected side label {other:?} at position {i}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(SideString)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetClass {
    Winning(u32),
    Indifferent,
    Losing(u32),
}

impl SetClass {
    pub fn from_gain(gain: i64) -> Self {
        match gain {
            0 => SetClass::Indifferent,
            g if g > 0 => SetClass::Winning(g as u32),
            g => SetClass::Losing((-g) as u32),
        }
    }

    pub fn gain(self) -> i64 {
        match self {
            SetClass::Winning(l) => l as i64,
            SetClass::Indifferent => 0,
            SetClass::Losing(l) => -(l as i64),
        }
    }
}

impl fmt::Display for SetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetClass::Winning(l) => write!(f, "winning({l})"),
            SetClass::Indifferent => f.write_str("indifferent"),
            SetClass::Losing(l) => write!(f, "losing({l})"),
        }
    }
}

/// Checks that `set` has no repeats and lies on `side`; returns a membership mask.
fn validate_set(c: &Cut, set: &[usize], side: Side) -> Result<Vec<bool>> {
    let mut mask = vec![false; c.n()];
    for &v in set {
        if v >= c.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: c.n() });
        }
        if c.sides[v] != side {
            return Err(Error::SideViolation { vertex: v });
        }
        if std::mem::replace(&mut mask[v], true) {
            return Err(Error::DuplicateVertex { vertex: v });
        }
    }
    Ok(mask)
}

/// Decrease of the crossing count if `set` alone moves across. The caller
/// guarantees that all of `set` is on one side and `in_set` is its mask.
pub(crate) fn set_gain_masked(g: &Multigraph, c: &Cut, set: &[usize], in_set: impl Fn(usize) -> bool) -> i64 {
    let mut gain = 0i64;
    for &v in set {
        for inc in g.incidences(v) {
            let u = inc.neighbor;
            if u == v {
                continue;
            }
            if c.sides[u] != c.sides[v] {
                gain += 1;
            } else if !in_set(u) {
                gain -= 1;
            }
        }
    }
    gain
}

pub fn set_gain(g: &Multigraph, c: &Cut, set: &[usize]) -> Result<i64> {
    let Some(&first) = set.first() else { return Ok(0) };
    if first >= c.n() {
        return Err(Error::VertexOutOfRange { vertex: first, n: c.n() });
    }
    let mask = validate_set(c, set, c.sides[first])?;
    Ok(set_gain_masked(g, c, set, |v| mask[v]))
}

pub fn classify_set(g: &Multigraph, c: &Cut, set: &[usize], side: Side) -> Result<SetClass> {
    let mask = validate_set(c, set, side)?;
    Ok(SetClass::from_gain(set_gain_masked(g, c, set, |v| mask[v])))
}

/// Number of edges with one end in each of two vertex masks.
pub(crate) fn edges_between(g: &Multigraph, a: &[usize], in_b: impl Fn(usize) -> bool) -> i64 {
    a.iter()
        .map(|&v| g.incidences(v).iter().filter(|i| i.neighbor != v && in_b(i.neighbor)).count() as i64)
        .sum()
}

/// Predicted decrease in crossing when `s1` and `s2` are exchanged:
/// the two set gains minus twice the edges joining them.
pub fn exchange_gain(g: &Multigraph, c: &Cut, s1: &[usize], s2: &[usize]) -> Result<i64> {
    let m1 = validate_set(c, s1, Side::One)?;
    let m2 = validate_set(c, s2, Side::Two)?;
    let g1 = set_gain_masked(g, c, s1, |v| m1[v]);
    let g2 = set_gain_masked(g, c, s2, |v| m2[v]);
    Ok(g1 + g2 - 2 * edges_between(g, s1, |v| m2[v]))
}

/// Swaps `s1 ⊆ V₁` with `s2 ⊆ V₂`. Part sizes are preserved.
pub fn apply_exchange(g: &Multigraph, c: &Cut, s1: &[usize], s2: &[usize]) -> Result<Cut> {
    if s1.len() != s2.len() {
        return Err(Error::UnequalExchange { left: s1.len(), right: s2.len() });
    }
    validate_set(c, s1, Side::One)?;
    validate_set(c, s2, Side::Two)?;
    let mut out = c.clone();
    for &v in s1.iter().chain(s2) {
        out.flip(g, v);
    }
    debug_assert_eq!(out.crossing, out.recount(g));
    Ok(out)
}

/// Increase in crossing if `v` alone is moved.
pub fn move_cost(g: &Multigraph, c: &Cut, v: usize) -> i64 {
    c.internal_degree(g, v) as i64 - c.crossing_degree(g, v) as i64
}

/// Moves cheapest vertices off the larger side until the imbalance is at
/// most `slack`. Ties go to the lowest vertex id. With an odd vertex count
/// the imbalance cannot drop below 1.
pub fn repair_balance(g: &Multigraph, c: &Cut, slack: usize) -> Cut {
    let mut out = c.clone();
    while out.imbalance() > slack.max(out.n() % 2) {
        let larger = if out.counts[0] > out.counts[1] { Side::One } else { Side::Two };
        let best = out
            .members(larger)
            .min_by_key(|&v| (move_cost(g, &out, v), v))
            .expect("larger side is nonempty");
        out.flip(g, best);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    fn c6() -> Multigraph {
        named::cycle(6)
    }

    #[test]
    fn cycle_cuts() {
        let g = c6();
        assert_eq!(Cut::from_fn(&g, |v| v < 3).crossing(), 2);
        assert_eq!(Cut::from_fn(&g, |v| v % 2 == 0).crossing(), 6);
    }

    #[test]
    fn k4_balanced_splits_all_cut_four() {
        let g = named::complete4();
        for partner in 1..4 {
            assert_eq!(Cut::from_fn(&g, |v| v == 0 || v == partner).crossing(), 4);
        }
    }

    #[test]
    fn loops_never_cross() {
        let g = Multigraph::new(2, vec![(0, 0), (0, 1), (1, 1)]).unwrap();
        let mut c = Cut::from_fn(&g, |v| v == 0);
        assert_eq!(c.crossing(), 1);
        c.flip(&g, 0);
        assert_eq!(c.crossing(), 0);
        assert_eq!(c.recount(&g), 0);
    }

    #[test]
    fn bisection_slack() {
        let g = named::cycle(10);
        assert!(Cut::from_fn(&g, |v| v < 5).is_bisection(0));
        let c = Cut::from_fn(&g, |v| v < 8);
        assert!(c.is_bisection(10));
        assert!(!c.is_bisection(5));
    }

    #[test]
    fn singleton_classes() {
        let g = named::complete4();
        let c = Cut::from_fn(&g, |v| v != 0);
        assert_eq!(classify_set(&g, &c, &[0], Side::Two).unwrap(), SetClass::Winning(3));
        assert_eq!(classify_set(&g, &c, &[1], Side::One).unwrap(), SetClass::Losing(1));
        assert!(matches!(classify_set(&g, &c, &[0], Side::One), Err(Error::SideViolation { vertex: 0 })));
        assert!(matches!(classify_set(&g, &c, &[1, 1], Side::One), Err(Error::DuplicateVertex { .. })));
    }

    #[test]
    fn degree_two_pair_is_indifferent() {
        // prism: outer triangle 0,1,2, inner triangle 3,4,5, spokes i - i+3.
        // With the outer triangle on side one, 0 and 1 each have two in-part
        // edges and one crossing spoke.
        let g = named::prism(3);
        let c = Cut::from_fn(&g, |v| v < 3);
        assert_eq!(classify_set(&g, &c, &[0, 1], Side::One).unwrap(), SetClass::Indifferent);
    }

    #[test]
    fn pair_joined_only_to_each_other_wins_four() {
        let g = named::prism(3);
        let c = Cut::from_fn(&g, |v| v == 0 || v == 1 || v == 5);
        assert_eq!(c.internal_degree(&g, 0), 1);
        assert_eq!(c.internal_degree(&g, 1), 1);
        assert_eq!(classify_set(&g, &c, &[0, 1], Side::One).unwrap(), SetClass::Winning(4));
    }

    #[test]
    fn exchange_with_joining_edge() {
        let g = named::complete4();
        let c = Cut::from_fn(&g, |v| v < 2);
        let predicted = exchange_gain(&g, &c, &[0], &[2]).unwrap();
        let after = apply_exchange(&g, &c, &[0], &[2]).unwrap();
        assert_eq!(c.crossing() as i64 - after.crossing() as i64, predicted);
        assert_eq!(after.crossing(), after.recount(&g));
        assert_eq!(after.counts(), c.counts());
    }

    #[test]
    fn empty_exchange_is_identity() {
        let g = c6();
        let c = Cut::from_fn(&g, |v| v < 3);
        assert_eq!(apply_exchange(&g, &c, &[], &[]).unwrap(), c);
        assert!(matches!(apply_exchange(&g, &c, &[0], &[]), Err(Error::UnequalExchange { .. })));
    }

    #[test]
    fn repair_counts() {
        let g = named::cycle(10);
        let c = Cut::from_fn(&g, |v| v < 7);
        let r = repair_balance(&g, &c, 0);
        assert_eq!(r.counts(), (5, 5));
        assert!(r.crossing() <= c.crossing() + 2 * 3);
        let balanced = Cut::from_fn(&g, |v| v < 5);
        assert_eq!(repair_balance(&g, &balanced, 0), balanced);
    }

    #[test]
    fn line_round_trip() {
        let g = c6();
        let c = Cut::from_fn(&g, |v| v % 3 == 0);
        assert_eq!(c.to_line(), "122122");
        assert_eq!(Cut::parse(&g, &c.to_line()).unwrap(), c);
        assert!(Cut::parse(&g, "12x122").is_err());
        assert!(matches!(Cut::parse(&g, "12"), Err(Error::CutSizeMismatch { .. })));
    }
}
