//! Seven-variable orthant probability and the upper-bound chain.
//!
//! The seven vertices are a center `v4` on one side whose neighbours `v3`
//! and `v5` are on the other side, together with the two further
//! neighbours of each (`v1, v2` at `v3`, `v6, v7` at `v5`). All seven
//! coordinates of `(X1, X2, X3, −X4, X5, X6, X7)` being positive means `v4`
//! is an isolated vertex of the border graph.

use nalgebra::{DMatrix, SMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::wave::{cherry_orthant_probs, rate_from_trio, sigma_table, tree_correlation, OrthantTrio};

pub type Matrix7 = SMatrix<f64, 7, 7>;

/// Tree distances between `v1..v7`.
pub const DISTANCES: [[usize; 7]; 7] = [
    [0, 2, 1, 2, 3, 4, 4],
    [2, 0, 1, 2, 3, 4, 4],
    [1, 1, 0, 1, 2, 3, 3],
    [2, 2, 1, 0, 1, 2, 2],
    [3, 3, 2, 1, 0, 1, 1],
    [4, 4, 3, 2, 1, 0, 2],
    [4, 4, 3, 2, 1, 2, 0],
];

/// Index of `v4`, the negated coordinate.
pub const NEGATED: usize = 3;

/// Builds the covariance from a correlation-at-distance function.
pub fn covariance_from(corr: impl Fn(usize) -> f64) -> Matrix7 {
    Matrix7::from_fn(|i, j| {
        let c = if i == j { 1.0 } else { corr(DISTANCES[i][j]) };
        let flip = (i == NEGATED) != (j == NEGATED);
        if flip {
            -c
        } else {
            c
        }
    })
}

pub fn covariance_matrix_b(lambda: f64) -> Matrix7 {
    let s = sigma_table(4, lambda);
    covariance_from(|d| s[d])
}

/// Covariance of the truncated field at radius `R`, normalised to unit variance.
pub fn covariance_matrix_finite(radius: usize, lambda: f64) -> Matrix7 {
    let r: Vec<f64> = (0..=4).map(|d| tree_correlation(radius, d, lambda)).collect();
    covariance_from(|d| r[d])
}

/// `V` with `V Vᵀ = m`, from the eigendecomposition of `m`. Eigenvalues
/// below `1e−12` are clipped to zero.
pub fn factor_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -1e-9) {
        return Err(Error::Domain(format!("matrix is not positive semidefinite (eigenvalue {bad})")));
    }
    let roots = eig.eigenvalues.map(|l| if l < 1e-12 { 0.0 } else { l.sqrt() });
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

pub fn factor_b(lambda: f64) -> Result<DMatrix<f64>> {
    let b = covariance_matrix_b(lambda);
    factor_psd(&DMatrix::from_iterator(7, 7, b.iter().copied()))
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sampler for `P(V Z > 0)` coordinatewise.
#[derive(Debug, Clone)]
pub struct OrthantRegion {
    rows: Vec<Vec<f64>>,
    dim: usize,
    /// Column solved for in the inequality form; nonzero in every row.
    pivot: Option<usize>,
}

impl OrthantRegion {
    pub fn from_factor(v: &DMatrix<f64>) -> Self {
        let rows: Vec<Vec<f64>> = (0..v.nrows()).map(|i| v.row(i).iter().copied().collect()).collect();
        let dim = v.ncols();
        let pivot = (0..dim)
            .map(|j| (j, rows.iter().map(|r| r[j].abs()).fold(f64::INFINITY, f64::min)))
            .filter(|&(_, m)| m > 1e-8)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j);
        Self { rows, dim, pivot }
    }

    pub fn from_covariance(m: &DMatrix<f64>) -> Result<Self> {
        Ok(Self::from_factor(&factor_psd(m)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hit_direct(&self, z: &[f64]) -> bool {
        self.rows.iter().all(|r| r.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() > 0.0)
    }

    /// Same event written as `LB < z_pivot < UB`: every row is solved for
    /// the pivot coordinate, giving a lower bound where its coefficient is
    /// positive and an upper bound where it is negative.
    pub fn hit_reduced(&self, z: &[f64]) -> Option<bool> {
        let p = self.pivot?;
        let mut lb = f64::NEG_INFINITY;
        let mut ub = f64::INFINITY;
        for r in &self.rows {
            let rest: f64 = r.iter().zip(z).enumerate().filter(|&(j, _)| j != p).map(|(_, (a, b))| a * b).sum();
            let bound = -rest / r[p];
            if r[p] > 0.0 {
                lb = lb.max(bound);
            } else {
                ub = ub.min(bound);
            }
        }
        Some(lb < z[p] && z[p] < ub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
    pub seed: u64,
}

pub const DEFAULT_BLOCK: u64 = 1 << 16;

/// Hit-rate estimate of the orthant probability. Samples are split into
/// fixed-size blocks, each drawn from its own derived seed, so the result
/// does not depend on the number of worker threads.
pub fn orthant_mc_region(region: &OrthantRegion, samples: u64, seed: u64, block: u64) -> MCResult {
    let block = block.max(1);
    let blocks = samples.div_ceil(block);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = block.min(samples - b * block);
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_indexed(seed, "orthant", b));
            let mut z = vec![0.0; region.dim];
            let mut hits = 0u64;
            for _ in 0..len {
                z.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                hits += region.hit_direct(&z) as u64;
            }
            hits
        })
        .sum();
    let estimate = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
    MCResult {
        estimate,
        stderr: (estimate * (1.0 - estimate) / samples.max(1) as f64).sqrt(),
        samples,
        hits,
        seed,
    }
}

pub fn orthant_mc(samples: u64, seed: u64) -> Result<MCResult> {
    let region = OrthantRegion::from_factor(&factor_b(crate::wave::LAMBDA_DEFAULT)?);
    Ok(orthant_mc_region(&region, samples, seed, DEFAULT_BLOCK))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub printed: Vec<f64>,
    pub computed: f64,
    pub resolution: String,
}

/// Every number in the upper-bound derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundChain {
    pub lambda: f64,
    pub sigma: Vec<f64>,
    pub trio: OrthantTrio,
    pub lyons_rate: f64,
    /// Centers of border cherries per vertex on one side.
    pub border_center_density: f64,
    pub xi: f64,
    pub rigorous: f64,
    pub mc: Option<MCResult>,
    pub isolated_per_side: Option<f64>,
    pub isolated_gain: Option<f64>,
    pub remaining: Option<f64>,
    pub nonrigorous: Option<f64>,
    pub discrepancies: Vec<Discrepancy>,
}

pub fn border_center_density(trio: &OrthantTrio) -> f64 {
    trio.p_border * 1.5
}

pub fn rigorous_from_trio(trio: &OrthantTrio) -> f64 {
    let xi = border_center_density(trio) / 2.0;
    rate_from_trio(trio) - 2.0 * xi
}

pub fn rigorous_upper_bound(lambda: f64) -> Result<f64> {
    Ok(rigorous_from_trio(&cherry_orthant_probs(lambda)?))
}

/// Isolated centers are switched on both sides (gain one each), then the
/// independent-set split applies to what is left of the border graph.
pub fn nonrigorous_from(trio: &OrthantTrio, p7: f64) -> (f64, f64, f64, f64) {
    let iso = 3.0 * p7;
    let gain1 = 2.0 * iso;
    let remaining = border_center_density(trio) - iso;
    (iso, gain1, remaining, rate_from_trio(trio) - gain1 - remaining)
}

pub fn nonrigorous_upper_bound(mc: &MCResult) -> Result<f64> {
    let trio = cherry_orthant_probs(crate::wave::LAMBDA_DEFAULT)?;
    Ok(nonrigorous_from(&trio, mc.estimate).3)
}

pub fn upper_bound_chain(lambda: f64, mc: Option<MCResult>) -> Result<UpperBoundChain> {
    let trio = cherry_orthant_probs(lambda)?;
    let density = border_center_density(&trio);
    let non = mc.map(|m| nonrigorous_from(&trio, m.estimate));
    let mut discrepancies = vec![Discrepancy {
        quantity: "border cherry probability".into(),
        printed: vec![0.0149586, 0.0149595],
        computed: trio.p_border,
        resolution: "closed-form orthant value".into(),
    }];
    if let Some((iso, _, _, _)) = non {
        discrepancies.push(Discrepancy {
            quantity: "isolated centers per side".into(),
            printed: vec![0.008456, 0.0084912],
            computed: iso,
            resolution: "three times the orthant estimate; the remaining-centers subtraction uses this value".into(),
        });
    }
    Ok(UpperBoundChain {
        lambda,
        sigma: sigma_table(4, lambda),
        trio,
        lyons_rate: rate_from_trio(&trio),
        border_center_density: density,
        xi: density / 2.0,
        rigorous: rigorous_from_trio(&trio),
        mc,
        isolated_per_side: non.map(|x| x.0),
        isolated_gain: non.map(|x| x.1),
        remaining: non.map(|x| x.2),
        nonrigorous: non.map(|x| x.3),
        discrepancies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::LAMBDA_DEFAULT;

    #[test]
    fn factor_reproduces_b() {
        let b = covariance_matrix_b(LAMBDA_DEFAULT);
        let bd = DMatrix::from_iterator(7, 7, b.iter().copied());
        let v = factor_b(LAMBDA_DEFAULT).unwrap();
        assert!((&v * v.transpose() - &bd).amax() < 1e-9);
        let ev = eigenvalues(&bd);
        assert!(ev[0] > -1e-12);
        assert!(ev.iter().filter(|&&l| l > 1e-9).count() <= 5);
    }

    #[test]
    fn reduced_form_needs_a_pivot() {
        let region = OrthantRegion::from_factor(&factor_b(LAMBDA_DEFAULT).unwrap());
        assert!(region.pivot.is_some());
    }

    #[test]
    fn no_border_means_lyons() {
        let t = OrthantTrio { p_same: 0.8, p_one: 0.2, p_border: 0.0 };
        assert_eq!(rigorous_from_trio(&t), rate_from_trio(&t));
    }

    #[test]
    fn one_dimensional_sanity() {
        let region = OrthantRegion::from_covariance(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        let r = orthant_mc_region(&region, 200_000, 1, 4096);
        assert!((r.estimate - 0.5).abs() < 4.0 * r.stderr);
    }

    #[test]
    fn block_partition_is_seed_stable() {
        let region = OrthantRegion::from_factor(&factor_b(LAMBDA_DEFAULT).unwrap());
        let a = orthant_mc_region(&region, 100_000, 5, 1000);
        let b = orthant_mc_region(&region, 100_000, 5, 1000);
        assert_eq!(a, b);
    }
}
