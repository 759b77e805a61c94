mod common;

use cubic_bisect::graph::{named, sample_configuration, sample_simple_cubic, to_multigraph, Configuration, Multigraph};
use proptest::prelude::*;
use std::collections::HashMap;

fn cubic(n: usize, seed: u64) -> Multigraph {
    to_multigraph(&sample_configuration(n, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn configuration_is_a_perfect_matching(half in 1usize..60, seed: u64) {
        let c = sample_configuration(2 * half, seed).unwrap();
        let p = c.partner();
        prop_assert_eq!(p.len(), 6 * half);
        for (i, &j) in p.iter().enumerate() {
            prop_assert_ne!(i, j);
            prop_assert_eq!(p[j], i);
        }
    }

    #[test]
    fn multigraph_is_cubic(half in 1usize..60, seed: u64) {
        let g = cubic(2 * half, seed);
        prop_assert!(g.is_cubic());
        prop_assert_eq!(g.m(), 3 * half);
        prop_assert_eq!(g.cherries().len(), 3 * g.n());
    }

    #[test]
    fn edge_list_round_trip(half in 1usize..40, seed: u64) {
        let g = cubic(2 * half, seed);
        let back = Multigraph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.canonical(), g.canonical());
    }

    #[test]
    fn two_core_matches_naive_peeling(n in 1usize..30, m in 0usize..40, seed: u64) {
        let g = common::random_multigraph(n, m, seed);
        let core = g.two_core();
        prop_assert_eq!(&core.vertices, &common::naive_two_core(&g));
        for v in 0..core.graph.n() {
            prop_assert!(core.graph.degree(v) >= 2);
        }
    }

    #[test]
    fn short_cycles_match_brute_force(half in 2usize..12, seed: u64, len in 1usize..9) {
        let g = cubic(2 * half, seed);
        let brute = common::brute_cycle_vertices(&g, len).iter().filter(|&&b| b).count();
        prop_assert_eq!(g.count_short_cycle_vertices(len), brute);
    }

    #[test]
    fn balls_grow_with_radius(half in 2usize..30, seed: u64, v in 0usize..4) {
        let g = cubic(2 * half, seed);
        let mut prev = 0;
        for r in 0..5 {
            let b = g.ball(v, r).unwrap();
            prop_assert!(b.len() >= prev);
            prop_assert!(b.len() <= 1 + 3 * ((1usize << r) - 1));
            prev = b.len();
        }
    }
}

#[test]
fn short_cycles_on_named_graphs() {
    assert_eq!(named::petersen().count_short_cycle_vertices(4), 0);
    assert_eq!(named::petersen().count_short_cycle_vertices(5), 10);
    assert_eq!(named::prism(5).count_short_cycle_vertices(4), 10);
    assert_eq!(named::theta2().count_short_cycle_vertices(2), 2);
}

#[test]
fn random_simple_graph_is_simple() {
    let g = sample_simple_cubic(200, 9, 1000).unwrap();
    assert!(g.is_simple() && g.is_cubic());
}

#[test]
fn large_random_graph_is_typical() {
    let g = cubic(20_000, 3);
    assert!(g.count_short_cycle_vertices(20) > 0);
    assert!(g.count_short_cycle_vertices(4) < 100);
}

/// With n = 2 there are 15 perfect matchings of the 6 points; each must be
/// drawn with probability 1/15.
#[test]
fn matchings_are_uniform() {
    let draws = 60_000u64;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for s in 0..draws {
        let c = sample_configuration(2, s).unwrap();
        *counts.entry(c.partner().to_vec()).or_default() += 1;
    }
    assert_eq!(counts.len(), 15);
    let expect = draws as f64 / 15.0;
    let chi2: f64 = counts.values().map(|&o| (o as f64 - expect).powi(2) / expect).sum();
    // 14 degrees of freedom; 36.12 is the 0.999 quantile
    assert!(chi2 < 36.12, "chi2 = {chi2}");
}

#[test]
fn configuration_rejects_bad_partner() {
    assert!(Configuration::from_partner(2, vec![1, 0, 3, 2, 5, 4]).is_ok());
    assert!(Configuration::from_partner(2, vec![1, 0, 3, 2, 4, 5]).is_err());
    assert!(Configuration::from_partner(2, vec![1, 2, 0, 4, 5, 3]).is_err());
    assert!(sample_configuration(3, 0).is_err());
}
