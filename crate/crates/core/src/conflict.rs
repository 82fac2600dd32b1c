//! Minimal-conflict computation (`findMinConflict`).
//!
//! For CNF backends this is QuickXplain: divide-and-conquer over the
//! violation oracle, splitting candidate sets at the midpoint with a fixed
//! component order, so the conflict that comes back is deterministic. The
//! DPI's background and positive measurements stay fixed; only the candidate
//! component set is minimized.
//!
//! For explicit-conflicts backends the stored list already holds every
//! minimal conflict, so the first stored conflict contained in the candidate
//! set is returned directly. This keeps label computation aligned with the
//! stored conflict order, which is what the worked seven-component trace
//! assumes.

use crate::harness::SearchMetrics;
use crate::model::{CompSet, ComponentId};
use crate::reasoner::{Backend, Dpi};

/// Outcome of a `find_min_conflict` call over a candidate set K'.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MinConflictResult {
    /// A subset-minimal conflict within the candidate set.
    Conflict(CompSet),
    /// The candidate set does not violate the DPI.
    NoConflict,
    /// The empty set already violates the DPI (B ∪ P is broken).
    EmptyConflict,
}

/// Computes one minimal conflict within `candidates` (callers pass K \ n),
/// or reports that none exists.
pub fn find_min_conflict(
    dpi: &Dpi,
    candidates: &CompSet,
    metrics: &mut SearchMetrics,
) -> MinConflictResult {
    let checks_before = metrics.consistency_checks;
    if dpi.violates(&CompSet::new(), metrics) {
        return MinConflictResult::EmptyConflict;
    }
    if !dpi.violates(candidates, metrics) {
        return MinConflictResult::NoConflict;
    }
    let conflict = match &dpi.backend {
        Backend::Explicit(e) => e
            .conflicts
            .iter()
            .find(|c| c.is_subset(candidates))
            .expect("violates(candidates) implies a stored conflict inside them")
            .clone(),
        Backend::Cnf(_) => {
            let ordered: Vec<ComponentId> = candidates.iter().copied().collect();
            let found = quick_xplain(dpi, &CompSet::new(), false, &ordered, metrics);
            found.into_iter().collect()
        }
    };
    debug_assert!(minimality_holds(dpi, &conflict), "non-minimal conflict returned");
    debug_assert!(
        quickxplain_check_budget(metrics.consistency_checks - checks_before, conflict.len(), candidates.len()),
        "QuickXplain consistency-check budget exceeded"
    );
    metrics.conflicts_computed += 1;
    MinConflictResult::Conflict(conflict)
}

/// QuickXplain recursion. `base` is the set of components currently assumed
/// present besides the DPI's own B ∪ P; `base_shrunk` tells whether the
/// caller removed anything from the base since it was last known consistent.
fn quick_xplain(
    dpi: &Dpi,
    base: &CompSet,
    base_grew: bool,
    candidates: &[ComponentId],
    metrics: &mut SearchMetrics,
) -> Vec<ComponentId> {
    if base_grew && dpi.violates(base, metrics) {
        return Vec::new();
    }
    if candidates.len() == 1 {
        return candidates.to_vec();
    }
    let mid = candidates.len() / 2;
    let (left, right) = candidates.split_at(mid);
    let base_with_left: CompSet = base.iter().copied().chain(left.iter().copied()).collect();
    let delta_right = quick_xplain(dpi, &base_with_left, !left.is_empty(), right, metrics);
    let base_with_delta: CompSet =
        base.iter().copied().chain(delta_right.iter().copied()).collect();
    let mut delta_left = quick_xplain(dpi, &base_with_delta, !delta_right.is_empty(), left, metrics);
    delta_left.extend(delta_right);
    delta_left
}

/// Soft QuickXplain bound: roughly 2·|C|·(1 + log2(|K'|/|C|)) + 2 oracle
/// calls per invocation; the +4 margin absorbs the two trivial-case checks
/// and rounding of the logarithm.
fn quickxplain_check_budget(checks: u64, conflict_size: usize, candidate_size: usize) -> bool {
    let c = conflict_size.max(1) as f64;
    let k = candidate_size.max(1) as f64;
    let budget = 2.0 * c * (1.0 + (k / c).log2().max(0.0).ceil()) + 6.0;
    (checks as f64) <= budget
}

/// Every element of a returned conflict must be load-bearing.
fn minimality_holds(dpi: &Dpi, conflict: &CompSet) -> bool {
    let mut scratch = SearchMetrics::default();
    if !dpi.violates(conflict, &mut scratch) {
        return false;
    }
    conflict.iter().all(|c| {
        let mut smaller = conflict.clone();
        smaller.remove(c);
        !dpi.violates(&smaller, &mut scratch)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::comp_set;
    use crate::reasoner::{five_axioms_dpi, CnfProblem, CnfSentence, Lit};

    fn known_five_axioms_conflicts() -> Vec<CompSet> {
        vec![
            comp_set([0, 1]),
            comp_set([1, 2, 3]),
            comp_set([0, 2, 4]),
            comp_set([2, 3, 4]),
        ]
    }

    #[test]
    fn five_axioms_root_call_returns_a_known_minimal_conflict() {
        let dpi = five_axioms_dpi();
        let mut metrics = SearchMetrics::default();
        match find_min_conflict(&dpi, &dpi.all_components(), &mut metrics) {
            MinConflictResult::Conflict(c) => {
                assert!(known_five_axioms_conflicts().contains(&c), "unexpected conflict {c:?}");
            }
            other => panic!("expected a conflict, got {other:?}"),
        }
        assert_eq!(metrics.conflicts_computed, 1);
    }

    #[test]
    fn five_axioms_without_a_diagnosis_complement_has_no_conflict() {
        let dpi = five_axioms_dpi();
        let mut metrics = SearchMetrics::default();
        // K \ {ax1, ax3}: the complement of minimal diagnosis D1
        let candidates = comp_set([1, 3, 4]);
        assert_eq!(
            find_min_conflict(&dpi, &candidates, &mut metrics),
            MinConflictResult::NoConflict
        );
    }

    #[test]
    fn inconsistent_background_yields_empty_conflict() {
        let problem = CnfProblem {
            var_names: vec!["A".into()],
            component_cnf: vec![CnfSentence::new(vec![vec![Lit::new(0, true)]])],
            background: vec![vec![Lit::new(0, true)], vec![Lit::new(0, false)]],
            positive: vec![],
            negative: vec![],
        };
        let dpi = Dpi::new_cnf(vec!["ax1".into()], problem).unwrap();
        let mut metrics = SearchMetrics::default();
        assert_eq!(
            find_min_conflict(&dpi, &dpi.all_components(), &mut metrics),
            MinConflictResult::EmptyConflict
        );
    }

    #[test]
    fn explicit_backend_returns_first_stored_subset() {
        let dpi = Dpi::new_explicit(
            (0..7).map(|i| format!("ax{}", i + 1)).collect(),
            vec![
                comp_set([0, 1, 4]),
                comp_set([1, 3, 5]),
                comp_set([0, 2, 3]),
                comp_set([0, 4, 5, 6]),
            ],
        );
        let mut metrics = SearchMetrics::default();
        let all = dpi.all_components();
        assert_eq!(
            find_min_conflict(&dpi, &all, &mut metrics),
            MinConflictResult::Conflict(comp_set([0, 1, 4]))
        );
        // K \ {ax2}: first stored conflict avoiding component 1
        let without_ax2: CompSet = all.iter().copied().filter(|c| c.0 != 1).collect();
        assert_eq!(
            find_min_conflict(&dpi, &without_ax2, &mut metrics),
            MinConflictResult::Conflict(comp_set([0, 2, 3]))
        );
    }

    #[test]
    fn quickxplain_is_deterministic() {
        let dpi = five_axioms_dpi();
        let first = find_min_conflict(&dpi, &dpi.all_components(), &mut SearchMetrics::default());
        for _ in 0..5 {
            let again =
                find_min_conflict(&dpi, &dpi.all_components(), &mut SearchMetrics::default());
            assert_eq!(first, again);
        }
    }
}
