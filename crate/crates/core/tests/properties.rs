//! Randomized invariant checks for the cost model, the reasoner, and the
//! relationship between conflicts and diagnoses.

use std::collections::BTreeSet;

use proptest::prelude::*;

use mbd_core::{
    brute_force_min_conflicts, brute_force_min_diagnoses, cost_adjust, diagnosis_probability,
    CompSet, ComponentId, CostModel, Dpi, SearchMetrics,
};

fn pr_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.49, 1..=max_len)
}

fn small_conflicts(k: usize) -> impl Strategy<Value = Vec<CompSet>> {
    prop::collection::vec(
        prop::collection::btree_set(0..k, 1..=3.min(k)),
        1..=5,
    )
    .prop_map(|sets| {
        sets.into_iter()
            .map(|s| s.into_iter().map(ComponentId).collect())
            .collect()
    })
}

fn mask_set(mask: u32, k: usize) -> CompSet {
    (0..k).filter(|i| mask & (1 << i) != 0).map(ComponentId).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Adding a component to a set strictly lowers its MaxProb score.
    #[test]
    fn cost_is_strictly_anti_monotone(pr in pr_vec(8), mask in 0u32..256, extra in 0usize..8) {
        let k = pr.len();
        prop_assume!(extra < k);
        let model = CostModel::max_prob(&pr).unwrap();
        let base = mask_set(mask & ((1 << k) - 1), k);
        prop_assume!(!base.contains(&ComponentId(extra)));
        let mut bigger = base.clone();
        bigger.insert(ComponentId(extra));
        prop_assert!(model.f_cost(&bigger) < model.f_cost(&base));
    }

    /// The fault-pattern distribution over all subsets of K sums to one.
    #[test]
    fn pattern_probabilities_sum_to_one(pr in pr_vec(10)) {
        let k = pr.len();
        let total: f64 = (0u32..(1 << k))
            .map(|mask| diagnosis_probability(&mask_set(mask, k), &pr).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    /// Adjustment keeps every value in (0, 0.5) and preserves ranking.
    #[test]
    fn adjustment_scales_below_half(values in prop::collection::vec(0.01f64..0.99, 1..8)) {
        let adjusted = cost_adjust(&values, 0.25).unwrap();
        prop_assert!(adjusted.iter().all(|v| *v > 0.0 && *v < 0.5));
        for (a, b) in values.iter().zip(values.iter().skip(1)) {
            let (x, y) = (adjusted[values.iter().position(|v| v == a).unwrap()],
                          adjusted[values.iter().position(|v| v == b).unwrap()]);
            prop_assert_eq!(a.partial_cmp(b), x.partial_cmp(&y));
        }
    }

    /// A superset of a violating set violates too.
    #[test]
    fn violation_is_monotone(conflicts in small_conflicts(6), mask in 0u32..64, extra in 0usize..6) {
        let names = (0..6).map(|i| format!("c{i}")).collect();
        let dpi = Dpi::new_explicit(names, conflicts);
        let mut metrics = SearchMetrics::default();
        let s = mask_set(mask, 6);
        let mut t = s.clone();
        t.insert(ComponentId(extra));
        if dpi.violates(&s, &mut metrics) {
            prop_assert!(dpi.violates(&t, &mut metrics));
        }
    }

    /// Minimal diagnoses are exactly the minimal hitting sets of the
    /// minimal conflicts.
    #[test]
    fn diagnoses_are_minimal_hitting_sets(conflicts in small_conflicts(7)) {
        let k = 7;
        let names = (0..k).map(|i| format!("c{i}")).collect();
        let dpi = Dpi::new_explicit(names, conflicts);
        let min_conflicts = brute_force_min_conflicts(&dpi);

        // independent hitting-set enumeration
        let mut hitting: Vec<CompSet> = Vec::new();
        for size in 0..=k {
            for mask in 0u32..(1 << k) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let candidate = mask_set(mask, k);
                if hitting.iter().any(|h| h.is_subset(&candidate)) {
                    continue;
                }
                if min_conflicts.iter().all(|c| !c.is_disjoint(&candidate)) {
                    hitting.push(candidate);
                }
            }
        }
        let diagnoses: BTreeSet<CompSet> =
            brute_force_min_diagnoses(&dpi).into_iter().collect();
        let hitting: BTreeSet<CompSet> = hitting.into_iter().collect();
        prop_assert_eq!(diagnoses, hitting);
    }
}
