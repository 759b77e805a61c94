mod common;

use cubic_bisect::cut::{apply_exchange, cut_size, exchange_gain, repair_balance, set_gain, Cut, Side};
use cubic_bisect::graph::{sample_configuration, to_multigraph, Multigraph};
use cubic_bisect::improve::{enumerate_candidates, find_improvement, local_search, random_bisection, MoveBudget};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn cubic(n: usize, seed: u64) -> Multigraph {
    to_multigraph(&sample_configuration(n, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flips_track_the_recount(half in 1usize..40, seed: u64, flips in proptest::collection::vec(0usize..80, 0..50)) {
        let g = cubic(2 * half, seed);
        let mut c = random_bisection(&g, seed);
        for v in flips {
            c.flip(&g, v % g.n());
            prop_assert_eq!(c.crossing(), cut_size(&g, c.sides()));
        }
    }

    #[test]
    fn set_gain_is_the_move_delta(half in 2usize..30, seed: u64, pick in subsequence((0..60).collect::<Vec<usize>>(), 1..6)) {
        let g = cubic(2 * half, seed);
        let c = random_bisection(&g, seed ^ 1);
        let side = c.side(pick[0] % g.n());
        let mut set: Vec<usize> = pick.iter().map(|v| v % g.n()).filter(|&v| c.side(v) == side).collect();
        set.sort_unstable();
        set.dedup();
        let gain = set_gain(&g, &c, &set).unwrap();
        let mut moved = c.clone();
        for &v in &set {
            moved.flip(&g, v);
        }
        prop_assert_eq!(gain, c.crossing() as i64 - moved.crossing() as i64);
    }

    #[test]
    fn exchange_gain_matches_recount(half in 2usize..30, seed: u64, a in 0usize..60, b in 0usize..60, k in 1usize..4) {
        let g = cubic(2 * half, seed);
        let c = random_bisection(&g, seed);
        let ones: Vec<usize> = c.members(Side::One).collect();
        let twos: Vec<usize> = c.members(Side::Two).collect();
        let k = k.min(ones.len()).min(twos.len());
        let s1: Vec<usize> = (0..k).map(|i| ones[(a + i) % ones.len()]).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let s2: Vec<usize> = (0..s1.len()).map(|i| twos[(b + i) % twos.len()]).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        prop_assume!(s1.len() == s2.len());
        let gain = exchange_gain(&g, &c, &s1, &s2).unwrap();
        let after = apply_exchange(&g, &c, &s1, &s2).unwrap();
        prop_assert_eq!(gain, c.crossing() as i64 - cut_size(&g, after.sides()) as i64);
        prop_assert_eq!(after.counts(), c.counts());
    }

    #[test]
    fn repair_reaches_balance(half in 1usize..40, seed: u64, bias in 0.0f64..1.0) {
        let g = cubic(2 * half, seed);
        let c = Cut::from_fn(&g, |v| (v as f64) < bias * g.n() as f64);
        let r = repair_balance(&g, &c, 0);
        prop_assert!(r.is_bisection(0));
        prop_assert_eq!(r.crossing(), cut_size(&g, r.sides()));
    }

    #[test]
    fn candidates_are_one_sided_and_classified(half in 2usize..30, seed: u64) {
        let g = cubic(2 * half, seed);
        let c = random_bisection(&g, seed);
        for side in [Side::One, Side::Two] {
            for cand in enumerate_candidates(&g, &c, side, 8) {
                prop_assert!(cand.set.iter().all(|&v| c.side(v) == side));
                prop_assert!(cand.set.len() <= 8);
                prop_assert_eq!(cand.class.gain(), set_gain(&g, &c, &cand.set).unwrap());
            }
        }
    }

    #[test]
    fn local_search_is_monotone_and_balanced(half in 2usize..40, seed: u64) {
        let g = cubic(2 * half, seed);
        let c = random_bisection(&g, seed);
        let out = local_search(&g, &c, &MoveBudget::default());
        prop_assert!(out.cut.is_bisection(0));
        prop_assert_eq!(out.cut.crossing(), cut_size(&g, out.cut.sides()));
        let mut prev = c.crossing();
        for t in &out.trace {
            prop_assert!(t.move_gain >= 1);
            prop_assert!(t.cut_size < prev);
            prev = t.cut_size;
        }
        prop_assert_eq!(prev, out.cut.crossing());
        prop_assert!(find_improvement(&g, &out.cut, &MoveBudget::default()).is_none() || out.rounds == MoveBudget::default().max_rounds);
    }
}

#[test]
fn local_search_never_beats_exhaustive_width() {
    for s in 0..40 {
        let g = cubic(10, s);
        let out = local_search(&g, &random_bisection(&g, s), &MoveBudget::default());
        assert!(out.cut.crossing() >= common::naive_width(&g));
    }
}
