//! Hybrid best-first hitting-set search: runs HS-Tree until a memory
//! criterion fires, then continues with the recursive search over the
//! remaining open nodes, treated as children of a virtual root.

use std::ops::ControlFlow;
use std::time::Instant;

use crate::harness::{SearchMetrics, SearchResult, SwitchInfo};
use crate::hstree::{hs_tree_inner, HsOutcome, HsTreeConfig, SwitchState};
use crate::model::{CostModel, Ld};
use crate::rbfhs::{rbf_hs_prime, ChildEntry, RbfCtx};
use crate::reasoner::Dpi;

/// When to abandon the queue-based phase.
#[derive(Clone, Copy, Debug)]
pub enum SwitchCriterion {
    /// After this many generated nodes (the root counts as one).
    NodeCount(u64),
    /// After `frac` of a node budget has been generated.
    MemoryFraction { frac: f64, budget: u64 },
}

impl SwitchCriterion {
    fn threshold(&self) -> u64 {
        match *self {
            SwitchCriterion::NodeCount(n) => n,
            SwitchCriterion::MemoryFraction { frac, budget } => {
                (frac * budget as f64).ceil() as u64
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct HbfConfig {
    pub criterion: SwitchCriterion,
    pub duplicate_check: bool,
    pub trace: bool,
}

impl HbfConfig {
    pub fn node_count(n: u64) -> Self {
        HbfConfig { criterion: SwitchCriterion::NodeCount(n), duplicate_check: false, trace: false }
    }
}

/// Computes the `ld` best minimal diagnoses in non-increasing cost order,
/// switching from HS-Tree to the linear-space search when the criterion
/// fires. If the tree finishes first, no switch happens.
pub fn hbf_hs(dpi: &Dpi, model: &CostModel, ld: Ld, config: &HbfConfig) -> SearchResult {
    let start = Instant::now();
    let hs_config = HsTreeConfig { duplicate_check: config.duplicate_check, trace: config.trace };
    let mut metrics = SearchMetrics::default();
    if config.trace {
        metrics.exploration_log = Some(Vec::new());
    }

    let state = match hs_tree_inner(
        dpi,
        model,
        ld,
        &hs_config,
        Some(config.criterion.threshold()),
        &mut metrics,
    ) {
        HsOutcome::Done(diagnoses, conflicts) => {
            metrics.wall_time = start.elapsed();
            return SearchResult { diagnoses, conflicts, metrics };
        }
        HsOutcome::Switched(state) => state,
    };
    let SwitchState { open, diagnoses, conflicts } = state;

    // S2: drop set-equal duplicates, keeping the earlier (better-ranked) copy
    let mut children: Vec<ChildEntry> = Vec::new();
    for (members, f) in open {
        let dup = children.iter().any(|e| matches!(e, ChildEntry::Real { members: m, .. } if m == &members));
        if !dup {
            children.push(ChildEntry::Real { members, f, backed: f });
        }
    }
    if children.len() == 1 {
        children.push(ChildEntry::Dummy);
    }
    // the queue was already best-first, but re-sort to be safe with FIFO ties
    children.sort_by_key(|c| std::cmp::Reverse(c.backed()));

    let mut switch_info = SwitchInfo {
        nodes_generated_at_switch: metrics.nodes_generated,
        diagnoses_at_switch: diagnoses.iter().map(|d| d.members.clone()).collect(),
        conflicts_at_switch: conflicts.len(),
        virtual_children: children
            .iter()
            .filter_map(|e| match e {
                ChildEntry::Real { members, .. } => Some(members.clone()),
                ChildEntry::Dummy => None,
            })
            .collect(),
        first_explored: None,
        first_bound: None,
        post_switch_peak: 0,
    };

    // S3: continue under a virtual root whose child list is the open queue
    let mut ctx = RbfCtx::new(dpi, model, ld, false);
    ctx.metrics = metrics;
    ctx.diagnoses = diagnoses;
    ctx.conflicts = conflicts;
    ctx.stored_base =
        switch_info.virtual_children.len() + ctx.diagnoses.len() + ctx.conflicts.len();

    loop {
        let best = children.remove(0);
        if best.backed().is_neg_inf() {
            break;
        }
        let bound = children[0].backed();
        let (members, f, backed) = match best {
            ChildEntry::Real { members, f, backed } => (members, f, backed),
            ChildEntry::Dummy => unreachable!("dummy has NegInf backed value"),
        };
        if switch_info.first_explored.is_none() {
            switch_info.first_explored = Some(members.clone());
            switch_info.first_bound = Some(bound);
        }
        let updated = match rbf_hs_prime(&mut ctx, &members, backed, bound) {
            ControlFlow::Break(()) => break,
            ControlFlow::Continue(v) => v,
        };
        debug_assert!(updated < backed);
        let at = children.partition_point(|e| e.backed() >= updated);
        children.insert(at, ChildEntry::Real { members, f, backed: updated });
    }

    switch_info.post_switch_peak = ctx.frame_peak;
    let RbfCtx { diagnoses, conflicts, mut metrics, .. } = ctx;
    metrics.switch = Some(switch_info);
    metrics.wall_time = start.elapsed();
    SearchResult { diagnoses, conflicts, metrics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hstree::hs_tree;
    use crate::model::{comp_set, CompSet, Cost};
    use crate::rbfhs::{rbf_hs, RbfConfig};
    use crate::reasoner::five_axioms_dpi;
    use std::collections::BTreeSet;

    fn diagnosis_sets(r: &SearchResult) -> BTreeSet<CompSet> {
        r.diagnoses.iter().map(|d| d.members.clone()).collect()
    }

    #[test]
    fn five_axioms_matches_pure_strategies_at_every_switch_point() {
        let dpi = five_axioms_dpi();
        let model = CostModel::min_card(5);
        let reference = hs_tree(&dpi, &model, Ld::All, &HsTreeConfig::default());
        for threshold in 1..=30 {
            let hybrid = hbf_hs(&dpi, &model, Ld::All, &HbfConfig::node_count(threshold));
            assert_eq!(
                diagnosis_sets(&hybrid),
                diagnosis_sets(&reference),
                "threshold {threshold}"
            );
        }
    }

    #[test]
    fn no_switch_when_tree_finishes_first() {
        let dpi = five_axioms_dpi();
        let model = CostModel::min_card(5);
        let r = hbf_hs(&dpi, &model, Ld::All, &HbfConfig::node_count(1_000_000));
        assert!(r.metrics.switch.is_none());
        assert_eq!(r.diagnoses.len(), 4);
    }

    #[test]
    fn switch_preserves_best_first_order_under_max_prob() {
        let dpi = five_axioms_dpi();
        let pr = [0.1, 0.05, 0.1, 0.05, 0.15];
        let model = CostModel::max_prob(&pr).unwrap();
        let reference = rbf_hs(&dpi, &model, Ld::All, &RbfConfig::default());
        for threshold in 1..=20 {
            let hybrid = hbf_hs(&dpi, &model, Ld::All, &HbfConfig::node_count(threshold));
            assert_eq!(
                diagnosis_sets(&hybrid),
                diagnosis_sets(&reference),
                "threshold {threshold}"
            );
            // same cost sequence: ties may swap, but the ranking must agree
            let got: Vec<Cost> = hybrid.diagnoses.iter().map(|d| d.cost).collect();
            let want: Vec<Cost> = reference.diagnoses.iter().map(|d| d.cost).collect();
            assert_eq!(got, want, "threshold {threshold}");
        }
    }

    #[test]
    fn memory_fraction_criterion_switches() {
        let dpi = five_axioms_dpi();
        let model = CostModel::min_card(5);
        let config = HbfConfig {
            criterion: SwitchCriterion::MemoryFraction { frac: 0.5, budget: 8 },
            duplicate_check: false,
            trace: false,
        };
        let r = hbf_hs(&dpi, &model, Ld::All, &config);
        assert!(r.metrics.switch.is_some());
        assert_eq!(
            diagnosis_sets(&r),
            [comp_set([0, 2]), comp_set([0, 3]), comp_set([1, 2]), comp_set([1, 4])]
                .into_iter()
                .collect()
        );
    }
}
