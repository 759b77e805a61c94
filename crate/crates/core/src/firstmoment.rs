//! First-moment exponents for the bisection lower bound.
//!
//! Type one counts bisections whose 2-core reduction has no weight-two path
//! structure on the cut; type two counts the remaining reduced bisections.
//! Both are evaluated as `(1/n) ln E[count]` in the limit, and the bound
//! holds wherever the exponent is negative (type one) or the growth base
//! `exp(exponent)` is below 1 (type two).

use std::f64::consts::LN_2;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_3: f64 = 1.098_612_288_668_109_8;
const LN_6: f64 = LN_2 + LN_3;

/// Grid step used by both optimizers.
pub const GRID_STEP: f64 = 1e-4;

/// Tail bound for the type-two series.
pub const SERIES_TOL: f64 = 1e-14;

const MAX_CUTOFF: usize = 100_000;

/// Penalty returned to the simplex search outside the domain.
const OUTSIDE: f64 = 1e300;

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Minimise `f` from `x0` with a Nelder–Mead simplex of the given steps.
fn simplex_min<F>(f: F, x0: &[f64], step: &[f64], iters: u64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    struct Wrap<F>(F);
    impl<F: Fn(&[f64]) -> f64> CostFunction for Wrap<F> {
        type Param = Vec<f64>;
        type Output = f64;
        fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
            let v = (self.0)(p);
            Ok(if v.is_finite() { v } else { OUTSIDE })
        }
    }
    let mut simplex = vec![x0.to_vec()];
    for (i, s) in step.iter().enumerate() {
        let mut p = x0.to_vec();
        p[i] += s;
        simplex.push(p);
    }
    let start = f(x0);
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .expect("positive tolerance");
    match Executor::new(Wrap(&f), solver)
        .configure(|s| s.max_iters(iters))
        .run()
    {
        Ok(res) => {
            let st = res.state();
            match st.get_best_param() {
                Some(p) if st.get_best_cost() < start => (p.clone(), st.get_best_cost()),
                _ => (x0.to_vec(), start),
            }
        }
        Err(_) => (x0.to_vec(), start),
    }
}

// ---------------------------------------------------------------------------
// Type one

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type1Point {
    pub beta_prime: f64,
    /// Total length `T` of the weight-carrying paths.
    pub t: f64,
}

impl Type1Point {
    pub fn new(beta_prime: f64, t: f64) -> Self {
        Type1Point { beta_prime, t }
    }

    pub fn validate(&self) -> Result<()> {
        let (b, t) = (self.beta_prime, self.t);
        if !(b.is_finite() && t.is_finite()) {
            return Err(domain("non-finite type-one point"));
        }
        if !(0.0..0.25).contains(&b) {
            return Err(domain(format!("beta' = {b} outside [0, 0.25)")));
        }
        if t < b || t > 2.0 * b {
            return Err(domain(format!("T = {t} outside [{b}, {}]", 2.0 * b)));
        }
        if 0.5 - b - t < 0.0 {
            return Err(domain(format!("beta' + T = {} exceeds 1/2", b + t)));
        }
        Ok(())
    }
}

/// Optimal path-length densities `t_i` at an interior point.
pub fn type1_lagrange_t(i: u32, p: Type1Point) -> Result<f64> {
    p.validate()?;
    let (b, t) = (p.beta_prime, p.t);
    if i == 0 {
        return Err(domain("path index starts at 1"));
    }
    if !(t > b && t < 2.0 * b) {
        return Err(domain("t_i needs beta' < T < 2 beta'"));
    }
    let r = (2.0 * b - t) / b;
    Ok((t - b) * (t - b) / (2.0 * b - t) * r.powi(i as i32))
}

/// The `t_i`-dependent part after minimisation; its limits at the two edges
/// are 0 (no paths) and `-beta' ln beta'` (all paths of length one).
fn type1_path_term(b: f64, t: f64) -> f64 {
    if t == b {
        0.0
    } else if t == 2.0 * b {
        -xlogx(b)
    } else {
        -2.0 * xlogx(t - b) + xlogx(b) - xlogx(2.0 * b - t)
    }
}

/// Exponential growth rate of the expected number of type-one bisections.
pub fn type1_exponent(p: Type1Point) -> Result<f64> {
    p.validate()?;
    let (b, t) = (p.beta_prime, p.t);
    Ok(0.5 * xlogx(1.5 - 5.0 * b)
        + (4.0 * b - 2.0 * t) * LN_2
        + (2.0 * b + t - 1.5) * LN_3
        + 0.5 * xlogx(1.5 - b)
        - xlogx(0.5 - b)
        - xlogx(0.5 - b - t)
        + type1_path_term(b, t))
}

fn type1_value(b: f64, t: f64) -> f64 {
    type1_exponent(Type1Point::new(b, t)).unwrap_or(f64::NEG_INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type1Certificate {
    /// Upper bound on the exponent over the whole trapezoid.
    pub upper_bound: f64,
    pub boxes: usize,
    /// Boxes that hit the size floor before meeting the tolerance.
    pub unresolved: usize,
}

impl Type1Certificate {
    pub fn certifies_negative(&self) -> bool {
        self.upper_bound < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type1Optimum {
    pub max_value: f64,
    pub argmax: Type1Point,
    pub grid_points: usize,
    pub certificate: Type1Certificate,
}

fn better(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    // total order: value, then smaller beta', then smaller T
    use std::cmp::Ordering::*;
    match a.0.partial_cmp(&b.0).unwrap_or(Equal) {
        Greater => a,
        Less => b,
        Equal => {
            if (a.1, a.2) <= (b.1, b.2) {
                a
            } else {
                b
            }
        }
    }
}

fn steps(lo: f64, hi: f64) -> usize {
    ((hi - lo) / GRID_STEP).ceil().max(0.0) as usize
}

/// Global maximum of [`type1_exponent`] over
/// `{beta' in [lo, hi], beta' <= T <= 2 beta'}`.
pub fn type1_optimize(beta_lo: f64, beta_hi: f64) -> Result<Type1Optimum> {
    if !(0.0 <= beta_lo && beta_lo <= beta_hi && beta_hi < 0.25) {
        return Err(domain(format!("bad beta' range [{beta_lo}, {beta_hi}]")));
    }
    let nb = steps(beta_lo, beta_hi);
    let rows: Vec<f64> = (0..=nb)
        .map(|i| {
            if nb == 0 {
                beta_lo
            } else {
                beta_lo + (beta_hi - beta_lo) * i as f64 / nb as f64
            }
        })
        .collect();
    let (best, count) = rows
        .par_iter()
        .map(|&b| {
            let nt = steps(b, 2.0 * b);
            let mut best = (f64::NEG_INFINITY, b, b);
            for j in 0..=nt {
                let t = if nt == 0 { b } else { b + b * j as f64 / nt as f64 };
                best = better(best, (type1_value(b, t), b, t));
            }
            (best, nt + 1)
        })
        .reduce(
            || ((f64::NEG_INFINITY, f64::MAX, f64::MAX), 0),
            |x, y| (better(x.0, y.0), x.1 + y.1),
        );

    let clamp_eval = |p: &[f64]| -> f64 {
        let b = if nb == 0 { beta_lo } else { p[0] };
        let t = if nb == 0 { p[0] } else { p[1] };
        if b < beta_lo || b > beta_hi {
            return f64::INFINITY;
        }
        -type1_value(b, t)
    };
    let (x0, st) = if nb == 0 {
        (vec![best.2], vec![-GRID_STEP / 2.0])
    } else {
        (vec![best.1, best.2], vec![-GRID_STEP / 2.0, GRID_STEP / 2.0])
    };
    let (xr, fr) = simplex_min(clamp_eval, &x0, &st, 2000);
    let refined = if nb == 0 {
        (-fr, beta_lo, xr[0])
    } else {
        (-fr, xr[0], xr[1])
    };
    let top = better(best, refined);
    let certificate = type1_certify(beta_lo, beta_hi, top.0, 1e-8)?;
    Ok(Type1Optimum {
        max_value: top.0,
        argmax: Type1Point::new(top.1, top.2),
        grid_points: count,
        certificate,
    })
}

#[derive(Debug, Clone, Copy)]
struct Iv {
    lo: f64,
    hi: f64,
}

impl Iv {
    fn new(lo: f64, hi: f64) -> Self {
        Iv { lo, hi }
    }
    fn nonneg(self) -> Self {
        Iv::new(self.lo.max(0.0), self.hi.max(0.0))
    }
    /// Range of `x ln x`, convex with its minimum at `1/e`.
    fn xlogx(self) -> Self {
        let s = self.nonneg();
        let m = (-1.0f64).exp();
        let lo = if s.lo <= m && m <= s.hi {
            -m
        } else {
            xlogx(s.lo).min(xlogx(s.hi))
        };
        Iv::new(lo, xlogx(s.lo).max(xlogx(s.hi)))
    }
    /// Range of `ln x + 1`.
    fn dxlogx(self) -> Self {
        let s = self.nonneg();
        Iv::new(s.lo.ln() + 1.0, s.hi.ln() + 1.0)
    }
    fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Iv::new(c * self.lo, c * self.hi)
        } else {
            Iv::new(c * self.hi, c * self.lo)
        }
    }
    fn add(self, o: Iv) -> Self {
        Iv::new(self.lo + o.lo, self.hi + o.hi)
    }
    fn abs_max(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Upper bound on the type-one exponent over the feasible part of a box.
/// Returns `None` if the box misses the trapezoid.
fn type1_box_upper(b: Iv, t: Iv) -> Option<f64> {
    let t = Iv::new(t.lo.max(b.lo), t.hi.min(2.0 * b.hi).min(0.5 - b.lo));
    if t.lo > t.hi {
        return None;
    }
    // arguments as intervals over the box
    let u1 = Iv::new(1.5 - 5.0 * b.hi, 1.5 - 5.0 * b.lo);
    let u2 = Iv::new(1.5 - b.hi, 1.5 - b.lo);
    let u3 = Iv::new(0.5 - b.hi, 0.5 - b.lo);
    let u4 = Iv::new(0.5 - b.hi - t.hi, 0.5 - b.lo - t.lo);
    let u5 = Iv::new(t.lo - b.hi, t.hi - b.lo);
    let u6 = Iv::new(2.0 * b.lo - t.hi, 2.0 * b.hi - t.lo);
    let lin = (4.0 * LN_2 + 2.0 * LN_3) * b.hi + (LN_3 - 2.0 * LN_2) * t.lo - 1.5 * LN_3;
    let natural = u1.xlogx().scale(0.5).hi
        + lin
        + u2.xlogx().scale(0.5).hi
        - u3.xlogx().lo
        - u4.xlogx().lo
        - 2.0 * u5.xlogx().lo
        + b.xlogx().hi
        - u6.xlogx().lo;

    // mean-value form around a feasible centre
    let bc = 0.5 * (b.lo + b.hi);
    let tc = 0.5 * (t.lo + t.hi);
    if !(tc > bc && tc < 2.0 * bc && 0.5 - bc - tc > 0.0) {
        return Some(natural);
    }
    let gb = u1
        .dxlogx()
        .scale(-2.5)
        .add(u2.dxlogx().scale(-0.5))
        .add(u3.dxlogx())
        .add(u4.dxlogx())
        .add(u5.dxlogx().scale(2.0))
        .add(b.nonneg().dxlogx())
        .add(u6.dxlogx().scale(-2.0))
        .add(Iv::new(4.0 * LN_2 + 2.0 * LN_3, 4.0 * LN_2 + 2.0 * LN_3));
    let gt = u4
        .dxlogx()
        .add(u5.dxlogx().scale(-2.0))
        .add(u6.dxlogx())
        .add(Iv::new(LN_3 - 2.0 * LN_2, LN_3 - 2.0 * LN_2));
    let hb = 0.5 * (b.hi - b.lo);
    let ht = 0.5 * (t.hi - t.lo);
    let mv = type1_value(bc, tc) + gb.abs_max() * hb + gt.abs_max() * ht;
    if mv.is_finite() {
        Some(natural.min(mv))
    } else {
        Some(natural)
    }
}

/// Branch-and-bound upper bound over the trapezoid: boxes are split until
/// their bound is within `tol` of `best`.
fn type1_certify(beta_lo: f64, beta_hi: f64, best: f64, tol: f64) -> Result<Type1Certificate> {
    const CELL: f64 = 1e-3;
    const FLOOR: f64 = 1e-10;
    let nb = ((beta_hi - beta_lo) / CELL).ceil().max(1.0) as usize;
    let nt = ((2.0 * beta_hi - beta_lo) / CELL).ceil().max(1.0) as usize;
    let mut roots = Vec::new();
    for i in 0..nb {
        let b = Iv::new(
            beta_lo + (beta_hi - beta_lo) * i as f64 / nb as f64,
            beta_lo + (beta_hi - beta_lo) * (i + 1) as f64 / nb as f64,
        );
        for j in 0..nt {
            let w = 2.0 * beta_hi - beta_lo;
            let t = Iv::new(
                beta_lo + w * j as f64 / nt as f64,
                beta_lo + w * (j + 1) as f64 / nt as f64,
            );
            roots.push((b, t));
        }
    }
    let results: Vec<(f64, usize, usize)> = roots
        .into_par_iter()
        .map(|root| {
            let mut stack = vec![root];
            let (mut upper, mut boxes, mut unresolved) = (f64::NEG_INFINITY, 0usize, 0usize);
            while let Some((b, t)) = stack.pop() {
                let Some(u) = type1_box_upper(b, t) else { continue };
                boxes += 1;
                let wb = b.hi - b.lo;
                let wt = t.hi - t.lo;
                if u <= best + tol {
                    upper = upper.max(u);
                } else if wb.max(wt) < FLOOR {
                    unresolved += 1;
                    upper = upper.max(u);
                } else if wb >= wt {
                    let m = 0.5 * (b.lo + b.hi);
                    stack.push((Iv::new(b.lo, m), t));
                    stack.push((Iv::new(m, b.hi), t));
                } else {
                    let m = 0.5 * (t.lo + t.hi);
                    stack.push((b, Iv::new(t.lo, m)));
                    stack.push((b, Iv::new(m, t.hi)));
                }
            }
            (upper, boxes, unresolved)
        })
        .collect();
    let mut cert = Type1Certificate {
        upper_bound: f64::NEG_INFINITY,
        boxes: 0,
        unresolved: 0,
    };
    for (u, b, r) in results {
        cert.upper_bound = cert.upper_bound.max(u);
        cert.boxes += b;
        cert.unresolved += r;
    }
    if !cert.upper_bound.is_finite() {
        return Err(domain("empty type-one domain"));
    }
    Ok(cert)
}

/// A point on the zero level set of the type-one exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurvePoint {
    pub beta_prime: f64,
    pub t: f64,
    pub value: f64,
}

/// Zero crossings of the type-one exponent in `T`, for `steps + 1` values
/// of beta' evenly spaced over `[beta_lo, beta_hi]`.
pub fn type1_zero_curve(beta_lo: f64, beta_hi: f64, steps: usize) -> Result<Vec<ZeroCurvePoint>> {
    if !(0.0 < beta_lo && beta_lo <= beta_hi && beta_hi < 0.25) || steps == 0 {
        return Err(domain("bad zero-curve range"));
    }
    const SCAN: usize = 2000;
    let rows: Vec<Vec<ZeroCurvePoint>> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let b = beta_lo + (beta_hi - beta_lo) * i as f64 / steps as f64;
            let hi_t = (2.0 * b).min(0.5 - b);
            let at = |j: usize| b + (hi_t - b) * j as f64 / SCAN as f64;
            let mut out = Vec::new();
            let mut prev = type1_value(b, at(0));
            for j in 1..=SCAN {
                let cur = type1_value(b, at(j));
                if (prev < 0.0) != (cur < 0.0) {
                    let (mut lo, mut hi) = (at(j - 1), at(j));
                    let lo_neg = prev < 0.0;
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if (type1_value(b, mid) < 0.0) == lo_neg {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let t = 0.5 * (lo + hi);
                    out.push(ZeroCurvePoint { beta_prime: b, t, value: type1_value(b, t) });
                }
                prev = cur;
            }
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Type two
//
// Multiplier convention: with `a = e^{lam1}`, `q = e^{lam3}` and `e^{lam2}`
// factored out, the families are
//   x_i            = q^i / (8e)                 weight i
//   x_{j,i}        = a q^{i+1} / (8e)           weight i + 1, j != (i+1)/2
//   x_{(i+1)/2,i}  = a q^{i+1} / (16e)          weight i + 1
//   y_{i,j,l}      = q^{i+j+l} / (8e | 16e | 48e) for distinct | two equal | all equal.
// The minimised objective is then (lam1 - ln 2) k + lam2 t + lam3 beta' - t.

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FamilySum {
    pub count: f64,
    pub weight: f64,
}

impl FamilySum {
    fn push(&mut self, value: f64, weight: usize) {
        self.count += value;
        self.weight += value * weight as f64;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Type2Families {
    pub singles: FamilySum,
    pub pairs_off_centre: FamilySum,
    pub pairs_centre: FamilySum,
    pub triples_distinct: FamilySum,
    pub triples_two_equal: FamilySum,
    pub triples_all_equal: FamilySum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Profile {
    pub s_count: f64,
    pub s_weight: f64,
    pub s_k: f64,
    pub families: Type2Families,
    /// Largest total weight included.
    pub cutoff: usize,
}

/// Smallest total weight after which the neglected part of every series is
/// below [`SERIES_TOL`].
pub fn type2_cutoff(lam1: f64, lam3: f64) -> Result<usize> {
    if !(lam3 < 0.0) || !lam1.is_finite() {
        return Err(domain(format!("divergent series at lam3 = {lam3}")));
    }
    let q = lam3.exp();
    let a = lam1.exp().max(1.0);
    // majorant for the weighted sum at total weight m
    let w = |m: f64| a * q.powf(m) * m * (3.0 + m + m * m) / (8.0 * std::f64::consts::E);
    for m in 1..MAX_CUTOFF {
        let mf = m as f64;
        let ratio = q * ((mf + 2.0) / (mf + 1.0))
            * (3.0 + (mf + 2.0) + (mf + 2.0).powi(2))
            / (3.0 + (mf + 1.0) + (mf + 1.0).powi(2));
        if ratio < 1.0 && w(mf + 1.0) / (1.0 - ratio) < SERIES_TOL {
            return Ok(m);
        }
    }
    Err(domain(format!("series at lam3 = {lam3} needs more than {MAX_CUTOFF} terms")))
}

/// Family sums with `e^{lam2} = 1`, truncated adaptively.
pub fn type2_profile(lam1: f64, lam3: f64) -> Result<Type2Profile> {
    let cutoff = type2_cutoff(lam1, lam3)?;
    type2_profile_with_cutoff(lam1, lam3, cutoff)
}

/// Family sums over all terms of total weight at most `cutoff`.
pub fn type2_profile_with_cutoff(lam1: f64, lam3: f64, cutoff: usize) -> Result<Type2Profile> {
    if !(lam3 < 0.0) || !lam1.is_finite() {
        return Err(domain(format!("divergent series at lam3 = {lam3}")));
    }
    let e8 = 8.0 * std::f64::consts::E;
    let a = lam1.exp();
    let mut f = Type2Families::default();
    for m in 1..=cutoff {
        let base = (lam3 * m as f64).exp() / e8;
        if base == 0.0 {
            break;
        }
        f.singles.push(base, m);
        if m >= 2 {
            // paths x_{j,i} with i = m - 1, j in 1..=(i+1)/2
            let i = m - 1;
            let centre = i % 2 == 1;
            let off = (i + 1) / 2 - usize::from(centre);
            f.pairs_off_centre.push(a * base * off as f64, m);
            if centre {
                f.pairs_centre.push(a * base / 2.0, m);
            }
        }
        if m >= 3 {
            let all = usize::from(m % 3 == 0);
            let two = (m - 1) / 2 - all;
            let parts = (m * m + 6) / 12; // round(m^2 / 12)
            let distinct = parts - two - all;
            f.triples_distinct.push(base * distinct as f64, m);
            f.triples_two_equal.push(base * two as f64 / 2.0, m);
            f.triples_all_equal.push(base * all as f64 / 6.0, m);
        }
    }
    let all = [
        f.singles,
        f.pairs_off_centre,
        f.pairs_centre,
        f.triples_distinct,
        f.triples_two_equal,
        f.triples_all_equal,
    ];
    Ok(Type2Profile {
        s_count: all.iter().map(|s| s.count).sum(),
        s_weight: all.iter().map(|s| s.weight).sum(),
        s_k: f.pairs_off_centre.count + f.pairs_centre.count,
        families: f,
        cutoff,
    })
}

/// One side of a type-two bisection after eliminating `lam2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Side {
    pub beta_prime: f64,
    pub lam1: f64,
    pub lam2: f64,
    pub lam3: f64,
    pub t: f64,
    pub k: f64,
}

impl Type2Side {
    /// Residuals of the three constraints (path count `k`, total count `t`,
    /// total weight `beta'`), recomputed from a fresh profile.
    pub fn residuals(&self) -> Result<[f64; 3]> {
        let p = type2_profile(self.lam1, self.lam3)?;
        let s = self.lam2.exp();
        Ok([
            s * p.s_k - self.k,
            s * p.s_count - self.t,
            s * p.s_weight - self.beta_prime,
        ])
    }

    /// Minimum of the automorphism/weight objective on this side.
    pub fn objective_min(&self) -> f64 {
        (self.lam1 - LN_2) * self.k + self.lam2 * self.t + self.lam3 * self.beta_prime - self.t
    }
}

pub fn type2_solve_lambda2(lam1: f64, lam3: f64, beta_prime: f64) -> Result<Type2Side> {
    if !(beta_prime > 0.0) {
        return Err(domain(format!("beta' = {beta_prime} must be positive")));
    }
    let p = type2_profile(lam1, lam3)?;
    if !(p.s_weight > 0.0) {
        return Err(domain("nonpositive weight sum"));
    }
    let lam2 = (beta_prime / p.s_weight).ln();
    let s = beta_prime / p.s_weight;
    Ok(Type2Side {
        beta_prime,
        lam1,
        lam2,
        lam3,
        t: s * p.s_count,
        k: s * p.s_k,
    })
}

/// Contribution of one side to the type-two exponent.
pub fn type2_side_rate(side: &Type2Side) -> Result<f64> {
    let b = side.beta_prime;
    let (t, k) = (side.t, side.k);
    if !(b > 0.0 && b < 0.3) {
        return Err(domain(format!("beta' = {b} out of range")));
    }
    // vertices of the side outside the reduced structure
    let c = 0.5 - 2.0 * b - t + k;
    let half_edges = 1.5 - 5.0 * b + 2.0 * k;
    if c < 0.0 {
        return Err(domain(format!("negative free vertex density {c}")));
    }
    if half_edges <= 0.0 {
        return Err(domain("no free half-edges"));
    }
    let choose_centres = 0.5 * (0.5f64).ln() - xlogx(b) - xlogx(0.5 - b);
    let matching = 1.5 * (xlogx(b) - b);
    let structures = -(side.objective_min() - t);
    let placement = xlogx(0.5 - b) - (0.5 - b) - xlogx(c) + c;
    let pairing = 0.5 * xlogx(half_edges) - 0.5 * half_edges;
    Ok(choose_centres + matching + structures + placement + pairing - c * LN_6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Point {
    pub beta1: f64,
    pub beta2: f64,
    pub lam1_a: f64,
    pub lam3_a: f64,
    pub lam1_b: f64,
    pub lam3_b: f64,
}

impl Type2Point {
    pub fn symmetric(beta: f64, lam1: f64, lam3: f64) -> Self {
        Type2Point {
            beta1: beta,
            beta2: beta,
            lam1_a: lam1,
            lam3_a: lam3,
            lam1_b: lam1,
            lam3_b: lam3,
        }
    }

    pub fn sides(&self) -> Result<(Type2Side, Type2Side)> {
        Ok((
            type2_solve_lambda2(self.lam1_a, self.lam3_a, self.beta1)?,
            type2_solve_lambda2(self.lam1_b, self.lam3_b, self.beta2)?,
        ))
    }
}

/// Rate of the regrouping binomial for `k1 n / 2 + k2 n / 2` path ends.
fn regroup_rate(k1: f64, k2: f64) -> f64 {
    let (h1, h2) = (0.5 * k1, 0.5 * k2);
    xlogx(h1 + h2) - xlogx(h1) - xlogx(h2)
}

/// Exponential growth rate of the expected number of type-two bisections.
pub fn type2_exponent(p: &Type2Point) -> Result<f64> {
    let (s1, s2) = p.sides()?;
    let constant = LN_2 + LN_6 - 1.5 * LN_3 + 1.5;
    Ok(constant + type2_side_rate(&s1)? + type2_side_rate(&s2)? - regroup_rate(s1.k, s2.k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Type2Domain {
    /// All pairs `(beta1, beta2)` in the square.
    #[default]
    Square,
    /// Only `beta1 = beta2`.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Type2Multipliers {
    /// Each side has its own `(lam1, lam3)`.
    #[default]
    Independent,
    /// Both sides share `(lam1, lam3)`.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type2Search {
    pub domain: Type2Domain,
    pub multipliers: Type2Multipliers,
    /// Grid points per axis over the beta' range.
    pub beta_grid: usize,
    pub lam1_starts: Vec<f64>,
    pub lam3_starts: Vec<f64>,
}

impl Default for Type2Search {
    fn default() -> Self {
        Type2Search {
            domain: Type2Domain::Square,
            multipliers: Type2Multipliers::Independent,
            beta_grid: 5,
            lam1_starts: vec![-1.0, 0.0, 1.0],
            lam3_starts: vec![-2.5, -1.4, -0.7],
        }
    }
}

impl Type2Search {
    /// Diagonal domain with shared multipliers.
    pub fn symmetric() -> Self {
        Type2Search {
            domain: Type2Domain::Diagonal,
            multipliers: Type2Multipliers::Shared,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Optimum {
    /// Largest growth base `exp(exponent)` found.
    pub sup_base: f64,
    pub worst_point: Type2Point,
    pub exponent: f64,
    pub evaluations: usize,
}

impl Type2Optimum {
    pub fn certifies_below_one(&self) -> bool {
        self.sup_base < 1.0
    }
}

fn type2_value(p: &Type2Point) -> f64 {
    match type2_exponent(p) {
        Ok(v) if v.is_finite() => v,
        _ => f64::NEG_INFINITY,
    }
}

/// Inner maximisation over the multipliers at fixed `(beta1, beta2)`.
pub fn type2_max_multipliers(
    beta1: f64,
    beta2: f64,
    search: &Type2Search,
) -> (Type2Point, f64) {
    let shared = |x: &[f64]| Type2Point {
        beta1,
        beta2,
        lam1_a: x[0],
        lam3_a: x[1],
        lam1_b: x[0],
        lam3_b: x[1],
    };
    let mut best = (shared(&[0.0, -1.4]), f64::NEG_INFINITY);
    let mut starts = Vec::new();
    for &l1 in &search.lam1_starts {
        for &l3 in &search.lam3_starts {
            starts.push([l1, l3]);
        }
    }
    for s in starts {
        let (x, f) = simplex_min(|x| -type2_value(&shared(x)), &s, &[0.1, 0.1], 2000);
        if -f > best.1 {
            best = (shared(&x), -f);
        }
    }
    if search.multipliers == Type2Multipliers::Independent {
        let p = best.0;
        let full = |x: &[f64]| Type2Point {
            beta1,
            beta2,
            lam1_a: x[0],
            lam3_a: x[1],
            lam1_b: x[2],
            lam3_b: x[3],
        };
        let x0 = [p.lam1_a, p.lam3_a, p.lam1_b, p.lam3_b];
        let (x, f) = simplex_min(|x| -type2_value(&full(x)), &x0, &[0.05, 0.05, -0.05, -0.05], 4000);
        if -f > best.1 {
            best = (full(&x), -f);
        }
    }
    best
}

/// Supremum of the type-two growth base over `[beta_lo, beta_hi]`.
pub fn type2_optimize(beta_lo: f64, beta_hi: f64, search: &Type2Search) -> Result<Type2Optimum> {
    if !(0.0 < beta_lo && beta_lo <= beta_hi && beta_hi < 0.3) {
        return Err(domain(format!("bad beta' range [{beta_lo}, {beta_hi}]")));
    }
    let g = search.beta_grid.max(1);
    let axis: Vec<f64> = (0..g)
        .map(|i| {
            if g == 1 {
                beta_hi
            } else {
                beta_lo + (beta_hi - beta_lo) * i as f64 / (g - 1) as f64
            }
        })
        .collect();
    let mut pairs = Vec::new();
    for (i, &b1) in axis.iter().enumerate() {
        match search.domain {
            Type2Domain::Diagonal => pairs.push((b1, b1)),
            // the exponent is symmetric under swapping the sides
            Type2Domain::Square => pairs.extend(axis[..=i].iter().map(|&b2| (b1, b2))),
        }
    }
    let evaluations = pairs.len();
    let results: Vec<(Type2Point, f64)> = pairs
        .into_par_iter()
        .map(|(b1, b2)| type2_max_multipliers(b1, b2, search))
        .collect();
    let (point, value) = results
        .into_iter()
        .fold(None::<(Type2Point, f64)>, |acc, r| match acc {
            Some(a) if a.1 >= r.1 => Some(a),
            _ => Some(r),
        })
        .expect("nonempty grid");
    if !value.is_finite() {
        return Err(domain("no feasible multipliers found"));
    }
    Ok(Type2Optimum {
        sup_base: value.exp(),
        worst_point: point,
        exponent: value,
        evaluations,
    })
}
