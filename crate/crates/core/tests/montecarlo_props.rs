mod common;

use cubic_bisect::montecarlo::*;
use cubic_bisect::wave::{orthant_trio, LAMBDA_DEFAULT};
use nalgebra::DMatrix;

fn dm(m: &Matrix7) -> DMatrix<f64> {
    DMatrix::from_iterator(7, 7, m.iter().copied())
}

#[test]
fn b_matches_printed_matrix() {
    let b = dm(&covariance_matrix_b(LAMBDA_DEFAULT));
    assert!((b - common::printed_b()).amax() < 1e-12);
}

#[test]
fn b_has_rank_five() {
    let ev = eigenvalues(&dm(&covariance_matrix_b(LAMBDA_DEFAULT)));
    assert_eq!(ev.iter().filter(|&&l| l > 1e-9).count(), 5);
    assert!(ev[0].abs() < 1e-12);
}

#[test]
fn finite_radius_matrix_approaches_b() {
    let b = dm(&covariance_matrix_b(LAMBDA_DEFAULT));
    let mut prev = f64::INFINITY;
    for r in [4, 16, 64, 256] {
        let d = (dm(&covariance_matrix_finite(r, LAMBDA_DEFAULT)) - &b).amax();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 0.02);
}

#[test]
fn three_variable_analogue_matches_closed_form() {
    // a cherry: P(center > 0, ends < 0) is half the border probability
    let (r1, r2) = (0.6, 0.3);
    let m = DMatrix::from_row_slice(3, 3, &[1.0, -r1, -r1, -r1, 1.0, r2, -r1, r2, 1.0]);
    let region = OrthantRegion::from_covariance(&m).unwrap();
    let mc = orthant_mc_region(&region, 2_000_000, 3, DEFAULT_BLOCK);
    let exact = orthant_trio(r1, r2).unwrap().p_border / 2.0;
    assert!((mc.estimate - exact).abs() < 4.0 * mc.stderr, "{} vs {exact}", mc.estimate);
    let (cond, se) = common::conditional_orthant(&factor_psd(&m).unwrap(), 200_000, 3);
    assert!((cond - exact).abs() < 4.0 * se);
}

#[test]
fn direct_and_reduced_hits_agree() {
    use rand::{Rng, SeedableRng};
    let region = OrthantRegion::from_factor(&factor_b(LAMBDA_DEFAULT).unwrap());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut z = vec![0.0; region.dim()];
    for _ in 0..200_000 {
        z.iter_mut().for_each(|x| *x = rng.sample(rand_distr::StandardNormal));
        assert_eq!(Some(region.hit_direct(&z)), region.hit_reduced(&z));
    }
}

#[test]
fn estimate_agrees_with_conditional_estimator() {
    let mc = orthant_mc(4_000_000, 99).unwrap();
    let v = factor_b(LAMBDA_DEFAULT).unwrap();
    let (cond, se) = common::conditional_orthant(&v, 1_000_000, 99);
    let joint = (mc.stderr.powi(2) + se * se).sqrt();
    assert!((mc.estimate - cond).abs() < 4.0 * joint, "{} vs {cond}", mc.estimate);
}

#[test]
fn chain_is_consistent() {
    let chain = upper_bound_chain(LAMBDA_DEFAULT, None).unwrap();
    assert!((chain.rigorous - (chain.lyons_rate - 2.0 * chain.xi)).abs() < 1e-15);
    assert!(chain.nonrigorous.is_none());
    let mc = MCResult { estimate: 0.002818666, stderr: 0.0, samples: 1, hits: 0, seed: 0 };
    let chain = upper_bound_chain(LAMBDA_DEFAULT, Some(mc)).unwrap();
    assert!((chain.nonrigorous.unwrap() - 0.131366).abs() < 2e-4);
    assert!((chain.isolated_per_side.unwrap() - 0.008456).abs() < 1e-6);
    assert_eq!(chain.discrepancies.len(), 2);
}

#[test]
fn rejects_indefinite_matrix() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(factor_psd(&m).is_err());
}
