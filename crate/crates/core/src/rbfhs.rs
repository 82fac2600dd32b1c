//! Recursive best-first hitting-set search: computes minimal diagnoses in
//! best-first order while storing only the child lists along the current
//! recursion path, i.e. linear space in the number of minimal conflicts.

use std::ops::ControlFlow;
use std::time::Instant;

use crate::conflict::{find_min_conflict, MinConflictResult};
use crate::harness::{Diagnosis, SearchMetrics, SearchResult};
use crate::model::{CompSet, Cost, CostModel, Ld};
use crate::reasoner::Dpi;

#[derive(Clone, Debug, Default)]
pub struct RbfConfig {
    /// Record every labeled node in the metrics' exploration log.
    pub trace: bool,
}

/// One entry of a frame's child list. The dummy pads single-child lists so
/// that a best sibling bound (the second entry) always exists.
#[derive(Clone, Debug)]
pub(crate) enum ChildEntry {
    Real {
        members: CompSet,
        f: Cost,
        /// Backed-up value F: the best cost still reachable below this child.
        backed: Cost,
    },
    Dummy,
}

impl ChildEntry {
    pub(crate) fn backed(&self) -> Cost {
        match self {
            ChildEntry::Real { backed, .. } => *backed,
            ChildEntry::Dummy => Cost::NegInf,
        }
    }
}

/// Mutable search state threaded through the recursion.
pub(crate) struct RbfCtx<'a> {
    pub dpi: &'a Dpi,
    pub model: &'a CostModel,
    pub ld: Ld,
    pub diagnoses: Vec<Diagnosis>,
    pub conflicts: Vec<CompSet>,
    pub metrics: SearchMetrics,
    /// Real child-list entries currently held by active frames.
    pub stored_now: usize,
    /// Storage that exists outside the recursion (hybrid search carry-over),
    /// added to `stored_now` when updating the overall peak.
    pub stored_base: usize,
    /// High-water mark of `stored_now` alone.
    pub frame_peak: usize,
}

impl<'a> RbfCtx<'a> {
    pub(crate) fn new(dpi: &'a Dpi, model: &'a CostModel, ld: Ld, trace: bool) -> Self {
        let mut metrics = SearchMetrics::default();
        if trace {
            metrics.exploration_log = Some(Vec::new());
        }
        RbfCtx {
            dpi,
            model,
            ld,
            diagnoses: Vec::new(),
            conflicts: Vec::new(),
            metrics,
            stored_now: 0,
            stored_base: 0,
            frame_peak: 0,
        }
    }

    fn note_stored(&mut self) {
        self.frame_peak = self.frame_peak.max(self.stored_now);
        self.metrics.note_stored(self.stored_base + self.stored_now);
    }
}

/// Computes the `ld` best minimal diagnoses in non-increasing cost order
/// using linear memory.
pub fn rbf_hs(dpi: &Dpi, model: &CostModel, ld: Ld, config: &RbfConfig) -> SearchResult {
    let start = Instant::now();
    let mut ctx = RbfCtx::new(dpi, model, ld, config.trace);

    if !ld.reached(0) {
        match find_min_conflict(dpi, &dpi.all_components(), &mut ctx.metrics) {
            MinConflictResult::EmptyConflict => {}
            MinConflictResult::NoConflict => {
                let empty = CompSet::new();
                ctx.diagnoses.push(Diagnosis { cost: model.f_cost(&empty), members: empty });
            }
            MinConflictResult::Conflict(c) => {
                ctx.conflicts.push(c);
                let root = CompSet::new();
                let f = model.f_cost(&root);
                ctx.metrics.nodes_generated += 1;
                let _ = rbf_hs_prime(&mut ctx, &root, f, Cost::NegInf);
            }
        }
    }

    let RbfCtx { diagnoses, conflicts, mut metrics, .. } = ctx;
    metrics.wall_time = start.elapsed();
    SearchResult { diagnoses, conflicts, metrics }
}

enum Label {
    Closed,
    Valid,
    Conflict(CompSet),
}

fn label(ctx: &mut RbfCtx, members: &CompSet) -> Label {
    ctx.metrics.nodes_explored += 1;
    if let Some(log) = ctx.metrics.exploration_log.as_mut() {
        log.push(members.clone());
    }
    if ctx.diagnoses.iter().any(|d| d.members.is_subset(members)) {
        return Label::Closed;
    }
    if let Some(c) = ctx.conflicts.iter().find(|c| c.is_disjoint(members)) {
        ctx.metrics.conflicts_reused += 1;
        return Label::Conflict(c.clone());
    }
    let candidates: CompSet =
        ctx.dpi.all_components().difference(members).copied().collect();
    match find_min_conflict(ctx.dpi, &candidates, &mut ctx.metrics) {
        MinConflictResult::NoConflict => Label::Valid,
        MinConflictResult::Conflict(c) => {
            ctx.conflicts.push(c.clone());
            Label::Conflict(c)
        }
        MinConflictResult::EmptyConflict => unreachable!("empty conflict is caught at the root"),
    }
}

/// The recursive step. `backed` is F(n), `bound` the best cost available
/// elsewhere in the tree. Returns the updated F(n) on normal completion and
/// `Break` once `ld` diagnoses have been collected.
pub(crate) fn rbf_hs_prime(
    ctx: &mut RbfCtx,
    members: &CompSet,
    backed: Cost,
    bound: Cost,
) -> ControlFlow<(), Cost> {
    let f = ctx.model.f_cost(members);
    debug_assert!(backed <= f);
    debug_assert!(!backed.is_neg_inf());

    let conflict = match label(ctx, members) {
        Label::Closed => return ControlFlow::Continue(Cost::NegInf),
        Label::Valid => {
            debug_assert!(ctx.dpi.is_diagnosis(members, &mut SearchMetrics::default()));
            ctx.diagnoses.push(Diagnosis { members: members.clone(), cost: f });
            if ctx.ld.reached(ctx.diagnoses.len()) {
                return ControlFlow::Break(());
            }
            return ControlFlow::Continue(Cost::NegInf);
        }
        Label::Conflict(c) => c,
    };

    let mut children: Vec<ChildEntry> = Vec::with_capacity(conflict.len().max(2));
    for ax in &conflict {
        let mut child = members.clone();
        child.insert(*ax);
        let child_f = ctx.model.f_cost(&child);
        // pass the parent's backed-up value down when the parent was
        // re-expanded (f(n) > F(n)); otherwise the child starts at its own f
        let child_backed = if f > backed {
            backed.min(child_f)
        } else {
            child_f
        };
        ctx.metrics.nodes_generated += 1;
        children.push(ChildEntry::Real { members: child, f: child_f, backed: child_backed });
    }
    let real_count = children.len();
    if real_count == 1 {
        children.push(ChildEntry::Dummy);
    }
    // descending by F; the sort is stable so first-generated wins ties
    children.sort_by_key(|c| std::cmp::Reverse(c.backed()));

    ctx.stored_now += real_count;
    ctx.note_stored();

    let result = loop {
        let best = children.remove(0);
        if best.backed() < bound || best.backed().is_neg_inf() {
            break best.backed();
        }
        let sibling_bound = bound.max(children[0].backed());
        let (child_members, child_f, child_backed) = match best {
            ChildEntry::Real { members, f, backed } => (members, f, backed),
            ChildEntry::Dummy => unreachable!("dummy has NegInf backed value"),
        };
        let updated = match rbf_hs_prime(ctx, &child_members, child_backed, sibling_bound) {
            ControlFlow::Break(()) => return ControlFlow::Break(()),
            ControlFlow::Continue(v) => v,
        };
        debug_assert!(updated < child_backed);
        // re-insert after all entries with an equal or better value so that
        // ties stay first-in-first-out
        let at = children.partition_point(|e| e.backed() >= updated);
        children.insert(
            at,
            ChildEntry::Real { members: child_members, f: child_f, backed: updated },
        );
    };
    ctx.stored_now -= real_count;
    ControlFlow::Continue(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{comp_set, CostModel};
    use crate::reasoner::five_axioms_dpi;
    use std::collections::BTreeSet;

    #[test]
    fn five_axioms_min_card_matches_known_diagnoses() {
        let dpi = five_axioms_dpi();
        let model = CostModel::min_card(5);
        let result = rbf_hs(&dpi, &model, Ld::All, &RbfConfig::default());
        let got: BTreeSet<CompSet> =
            result.diagnoses.iter().map(|d| d.members.clone()).collect();
        let want: BTreeSet<CompSet> = [
            comp_set([0, 2]),
            comp_set([0, 3]),
            comp_set([1, 2]),
            comp_set([1, 4]),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn costs_are_non_increasing_under_max_prob() {
        let dpi = five_axioms_dpi();
        let pr = [0.1, 0.05, 0.1, 0.05, 0.15];
        let model = CostModel::max_prob(&pr).unwrap();
        let result = rbf_hs(&dpi, &model, Ld::All, &RbfConfig::default());
        let costs: Vec<Cost> = result.diagnoses.iter().map(|d| d.cost).collect();
        assert_eq!(costs.len(), 4);
        assert!(costs.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn ld_limit_truncates_in_best_first_order() {
        let dpi = five_axioms_dpi();
        let pr = [0.1, 0.05, 0.1, 0.05, 0.15];
        let model = CostModel::max_prob(&pr).unwrap();
        let all = rbf_hs(&dpi, &model, Ld::All, &RbfConfig::default());
        let two = rbf_hs(&dpi, &model, Ld::Limit(2), &RbfConfig::default());
        assert_eq!(two.diagnoses.len(), 2);
        assert_eq!(two.diagnoses[0].members, all.diagnoses[0].members);
        assert_eq!(two.diagnoses[1].members, all.diagnoses[1].members);
    }

    #[test]
    fn trivial_cases() {
        let none = Dpi::new_explicit(vec!["a".into()], vec![]);
        let model = CostModel::min_card(1);
        let r = rbf_hs(&none, &model, Ld::All, &RbfConfig::default());
        assert_eq!(r.diagnoses.len(), 1);
        assert!(r.diagnoses[0].members.is_empty());

        let broken = Dpi::new_explicit(vec!["a".into()], vec![CompSet::new()]);
        let r = rbf_hs(&broken, &model, Ld::All, &RbfConfig::default());
        assert!(r.diagnoses.is_empty());
    }
}
