mod common;

use mdep_core::oracle::expand_window_model;
use mdep_core::{
    build_phi, complement_intersection_prob, corollary_window, residue_classes, shifted_blocks,
    thm1_bound, thm1_exponent, thm2_bound, thm2_sharper, union_prob, BoundReport, EventFamily,
    ExplicitEventFamily, Interval, WindowModel, BOUND_TOL,
};
use proptest::prelude::*;

fn window_strategy(max_s: usize, max_m: usize, max_n: usize) -> impl Strategy<Value = WindowModel> {
    (2..=max_s, 0..=max_m, 0..=max_n, any::<u64>()).prop_map(|(s, m, n, seed)| {
        let mut r = common::rng(seed);
        common::random_window_model(&mut r, &[s], &[m], n..=n)
    })
}

/// Small explicit families with arbitrary (not necessarily m-dependent) events.
fn explicit_strategy() -> impl Strategy<Value = ExplicitEventFamily> {
    (1usize..8, 0usize..7, 0usize..3).prop_flat_map(|(outcomes, n, m)| {
        (
            prop::collection::vec(0.01f64..1.0, outcomes),
            prop::collection::vec(prop::collection::vec(0..outcomes, 0..=outcomes), n),
        )
            .prop_map(move |(raw, events)| {
                let total: f64 = raw.iter().sum();
                let weights = raw.into_iter().map(|w| w / total).collect();
                ExplicitEventFamily::new(weights, events, m).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn representations_agree(w in window_strategy(2, 3, 9)) {
        let e = expand_window_model(&w).unwrap();
        let n = w.len();
        for i in 1..=n {
            prop_assert!((w.event_prob(i).unwrap() - e.event_prob(i).unwrap()).abs() < 1e-12);
            for j in 1..=n {
                let a = w.pair_prob(i, j).unwrap();
                let b = e.pair_prob(i, j).unwrap();
                prop_assert!((a - b).abs() < 1e-12, "pair ({}, {}): {} vs {}", i, j, a, b);
            }
        }
    }

    #[test]
    fn pair_bounded_by_marginals(e in explicit_strategy()) {
        let n = e.len();
        for i in 1..=n {
            for j in 1..=n {
                let pij = e.pair_prob(i, j).unwrap();
                let bound = e.event_prob(i).unwrap().min(e.event_prob(j).unwrap());
                prop_assert!(pij <= bound + 1e-15);
            }
        }
    }

    #[test]
    fn partial_sums_nondecreasing(w in window_strategy(3, 2, 40)) {
        let mut last = 0.0;
        for upto in 0..=w.len() {
            let s = w.partial_sum_s(upto).unwrap();
            prop_assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn far_pairs_factorize_exactly(w in window_strategy(3, 3, 20)) {
        let m = w.dependence_range();
        let p = w.fire_prob();
        for i in 1..=w.len() {
            for j in (i + m + 1)..=w.len() {
                prop_assert_eq!(w.pair_prob(i, j).unwrap(), p * p);
            }
        }
    }

    #[test]
    fn union_complement_identity(w in window_strategy(3, 3, 30), a in 1usize..30, len in 0usize..30) {
        let n = w.len();
        prop_assume!(a <= n);
        let b = (a + len).min(n);
        let range = Interval::new(a, b);
        let idx: Vec<usize> = range.iter().collect();
        let u = union_prob(&w, range).unwrap();
        let c = complement_intersection_prob(&w, &idx).unwrap();
        prop_assert!((u - (1.0 - c)).abs() < 1e-12);
    }

    #[test]
    fn union_monotone_in_range(w in window_strategy(3, 3, 30)) {
        let n = w.len();
        let mut last = 0.0;
        for b in 1..=n {
            let u = union_prob(&w, Interval::new(1, b)).unwrap();
            prop_assert!(u + 1e-15 >= last);
            last = u;
        }
        for a in (1..=n).rev() {
            let u = union_prob(&w, Interval::new(a, n)).unwrap();
            prop_assert!(u <= last + 1e-15);
        }
    }

    #[test]
    fn inclusion_exclusion_two_events(e in explicit_strategy()) {
        prop_assume!(e.len() >= 2);
        let u = union_prob(&e, Interval::new(1, 2)).unwrap();
        let ie = e.event_prob(1).unwrap() + e.event_prob(2).unwrap() - e.pair_prob(1, 2).unwrap();
        prop_assert!((u - ie).abs() < 1e-12);
    }

    #[test]
    fn sparse_patterns_match_enumeration(w in window_strategy(2, 2, 10), mask in any::<u16>(), signs in any::<u16>()) {
        let e = expand_window_model(&w).unwrap();
        let pattern: Vec<(usize, bool)> = (1..=w.len())
            .filter(|k| mask >> (k - 1) & 1 == 1)
            .map(|k| (k, signs >> (k - 1) & 1 == 1))
            .collect();
        let a = w.pattern_prob(&pattern).unwrap();
        let b = e.pattern_prob(&pattern).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{:?}: {} vs {}", pattern, a, b);
    }

    #[test]
    fn exponent_identity(s in 0.0f64..500.0, t in 0.0f64..500.0, m in 1usize..12) {
        let direct = (s - t) / 2.0 - s / (m as f64 + 1.0);
        prop_assume!(direct.abs() > 1e-12);
        prop_assert_eq!(thm2_sharper(s, t, m).unwrap(), direct > 0.0);
    }

    #[test]
    fn residue_bound_monotone(s in 0.0f64..50.0, ds in 0.0f64..5.0, m in 0usize..10) {
        let b = thm1_bound(s, m).unwrap();
        prop_assert!(thm1_bound(s + ds, m).unwrap() >= b);
        prop_assert!(thm1_bound(s, m + 1).unwrap() <= b);
    }

    #[test]
    fn m1_exponents_coincide(w in window_strategy(3, 1, 60)) {
        prop_assume!(w.dependence_range() == 1);
        let r = BoundReport::new(&w).unwrap();
        prop_assert_eq!(r.t_local, Some(0.0));
        prop_assert!((r.thm1_exponent - r.thm2_exponent.unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pigeonhole_over_residue_classes(e in explicit_strategy()) {
        let m = e.dependence_range();
        let classes = residue_classes(e.len(), m);
        let best = classes
            .classes
            .iter()
            .map(|c| c.iter().map(|&k| e.event_prob(k).unwrap()).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert!(best + 1e-12 >= e.s_n() / (m as f64 + 1.0));
    }

    #[test]
    fn finite_window_bound_holds(w in window_strategy(3, 3, 120)) {
        let phi = build_phi(&w).unwrap();
        let m = w.dependence_range() as f64;
        for total in 1..=phi.max_defined() {
            for i in 0..total {
                let c = corollary_window(&w, &phi, i, total - i).unwrap();
                prop_assert!(c.mass_check);
                let u = union_prob(&w, c.indices).unwrap();
                let bound = 1.0 - (-((total - i) as f64) / (m + 1.0)).exp();
                prop_assert!(u >= bound - BOUND_TOL, "i={} n={}: {} < {}", i, total - i, u, bound);
            }
        }
    }
}

#[test]
fn partitions_are_complete() {
    for n in 0..=200 {
        for m in 0..=10 {
            let classes = residue_classes(n, m);
            assert_eq!(classes.classes.len(), m + 1);
            let mut all: Vec<usize> = classes.classes.concat();
            all.sort_unstable();
            assert_eq!(all, (1..=n).collect::<Vec<_>>());
            for class in &classes.classes {
                for pair in class.windows(2) {
                    assert!(pair[1] - pair[0] > m);
                }
            }
            if m == 0 {
                continue;
            }
            for r in 0..m {
                let part = shifted_blocks(n, m, r).unwrap();
                let mut covered = Vec::new();
                for (pos, block) in part.blocks.iter().enumerate() {
                    assert!(!block.indices.is_empty());
                    assert!(block.indices.len() <= m);
                    if pos != 0 && pos + 1 != part.blocks.len() {
                        assert_eq!(block.indices.len(), m, "n={n} m={m} r={r}");
                    }
                    covered.extend(block.indices.iter());
                }
                assert_eq!(covered, (1..=n).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn w1_reference_values() {
    let w = common::w1(24);
    assert_eq!(w.partial_sum_s(24).unwrap(), 3.0);
    assert_eq!(w.partial_sum_s(0).unwrap(), 0.0);
    assert_eq!(w.t_local().unwrap(), 1.4375);
    let (e, _) = thm2_bound(3.0, 1.4375, 2).unwrap();
    assert_eq!(e, 0.78125);
    assert_eq!(thm1_exponent(3.0, 2), 1.0);
}

#[test]
fn t_local_edge_cases() {
    let m1 = ExplicitEventFamily::uniform(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]], 1).unwrap();
    assert_eq!(m1.t_local().unwrap(), 0.0);
    let single = ExplicitEventFamily::uniform(4, vec![vec![0, 1]], 3).unwrap();
    assert_eq!(single.t_local().unwrap(), 0.0);
    let m0 = ExplicitEventFamily::uniform(4, vec![vec![0, 1]], 0).unwrap();
    assert!(m0.t_local().is_err());
    let w = WindowModel::run(2, vec![0.5, 0.5], 0, 1, 4).unwrap();
    assert!(w.t_local().is_err());
}

#[test]
fn explicit_partial_sum_example() {
    let e = ExplicitEventFamily::uniform(4, vec![vec![0, 1], vec![2]], 1).unwrap();
    assert_eq!(e.partial_sum_s(2).unwrap(), 0.75);
    assert!(e.partial_sum_s(3).is_err());
}
