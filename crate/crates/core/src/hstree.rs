//! Reiter's HS-Tree: sound, complete, best-first hitting-set search with an
//! exponential-space open queue. Serves as the baseline comparator and as
//! the first phase of the hybrid search.

use std::collections::VecDeque;
use std::time::Instant;

use crate::conflict::{find_min_conflict, MinConflictResult};
use crate::harness::{Diagnosis, SearchMetrics, SearchResult};
use crate::model::{CompSet, Cost, CostModel, CostMode, Ld};
use crate::reasoner::Dpi;

#[derive(Clone, Debug, Default)]
pub struct HsTreeConfig {
    /// Closes nodes that are set-equal to another queued node. Off by
    /// default: omitting it is usually faster and does not harm correctness.
    pub duplicate_check: bool,
    /// Record every labeled node in the metrics' exploration log.
    pub trace: bool,
}

#[derive(Clone, Debug)]
struct OpenNode {
    members: CompSet,
    f: Cost,
}

/// Open queue: FIFO under MinCard (breadth-first), descending-f with FIFO
/// tie-break under MaxProb (uniform-cost). Front is always the best node.
struct OpenQueue {
    mode: CostMode,
    nodes: VecDeque<OpenNode>,
}

impl OpenQueue {
    fn new(mode: CostMode) -> Self {
        OpenQueue { mode, nodes: VecDeque::new() }
    }

    fn push(&mut self, node: OpenNode) {
        match self.mode {
            CostMode::MinCard => self.nodes.push_back(node),
            CostMode::MaxProb => {
                // after all entries with f >= new f, keeping ties FIFO
                let at = self.nodes.partition_point(|n| n.f >= node.f);
                self.nodes.insert(at, node);
            }
        }
    }

    fn pop(&mut self) -> Option<OpenNode> {
        self.nodes.pop_front()
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn contains_set(&self, members: &CompSet) -> bool {
        self.nodes.iter().any(|n| &n.members == members)
    }
}

/// Result of running the tree loop up to a node-generation threshold.
pub(crate) enum HsOutcome {
    Done(Vec<Diagnosis>, Vec<CompSet>),
    Switched(SwitchState),
}

/// Everything the hybrid search carries over when the switch fires.
pub(crate) struct SwitchState {
    pub open: Vec<(CompSet, Cost)>,
    pub diagnoses: Vec<Diagnosis>,
    pub conflicts: Vec<CompSet>,
}

/// Computes the `ld` best minimal diagnoses in non-increasing cost order.
pub fn hs_tree(dpi: &Dpi, model: &CostModel, ld: Ld, config: &HsTreeConfig) -> SearchResult {
    let start = Instant::now();
    let mut metrics = SearchMetrics::default();
    if config.trace {
        metrics.exploration_log = Some(Vec::new());
    }
    let outcome = hs_tree_inner(dpi, model, ld, config, None, &mut metrics);
    let (diagnoses, conflicts) = match outcome {
        HsOutcome::Done(d, c) => (d, c),
        HsOutcome::Switched(_) => unreachable!("no switch threshold given"),
    };
    metrics.wall_time = start.elapsed();
    SearchResult { diagnoses, conflicts, metrics }
}

/// The tree loop, shared with the hybrid search. With `switch_at` set, the
/// loop stops once that many nodes have been generated (the root counts) and
/// hands back its open queue and collections.
pub(crate) fn hs_tree_inner(
    dpi: &Dpi,
    model: &CostModel,
    ld: Ld,
    config: &HsTreeConfig,
    switch_at: Option<u64>,
    metrics: &mut SearchMetrics,
) -> HsOutcome {
    let mut diagnoses: Vec<Diagnosis> = Vec::new();
    let mut conflicts: Vec<CompSet> = Vec::new();

    if ld.reached(0) {
        return HsOutcome::Done(diagnoses, conflicts);
    }
    match find_min_conflict(dpi, &dpi.all_components(), metrics) {
        MinConflictResult::EmptyConflict => return HsOutcome::Done(diagnoses, conflicts),
        MinConflictResult::NoConflict => {
            diagnoses.push(Diagnosis {
                members: CompSet::new(),
                cost: model.f_cost(&CompSet::new()),
            });
            return HsOutcome::Done(diagnoses, conflicts);
        }
        MinConflictResult::Conflict(c) => conflicts.push(c),
    }

    let mut queue = OpenQueue::new(model.mode);
    let root = CompSet::new();
    queue.push(OpenNode { f: model.f_cost(&root), members: root });
    metrics.nodes_generated += 1;
    metrics.note_stored(queue.len() + diagnoses.len() + conflicts.len());

    while let Some(node) = queue.pop() {
        metrics.nodes_explored += 1;
        if let Some(log) = metrics.exploration_log.as_mut() {
            log.push(node.members.clone());
        }

        let label = label_node(dpi, &node.members, &diagnoses, &conflicts, &queue, config, metrics);
        match label {
            Label::Closed => {}
            Label::Valid => {
                debug_assert!(dpi.is_diagnosis(&node.members, &mut SearchMetrics::default()));
                diagnoses.push(Diagnosis { members: node.members, cost: node.f });
                if ld.reached(diagnoses.len()) {
                    return HsOutcome::Done(diagnoses, conflicts);
                }
            }
            Label::Conflict(c) => {
                if conflicts.iter().all(|stored| stored != &c) {
                    conflicts.push(c.clone());
                }
                for ax in &c {
                    let mut members = node.members.clone();
                    members.insert(*ax);
                    let f = model.f_cost(&members);
                    queue.push(OpenNode { members, f });
                    metrics.nodes_generated += 1;
                }
            }
        }
        metrics.note_stored(queue.len() + diagnoses.len() + conflicts.len());
        if let Some(limit) = switch_at {
            if metrics.nodes_generated >= limit && queue.len() > 0 {
                return HsOutcome::Switched(SwitchState {
                    open: queue.nodes.into_iter().map(|n| (n.members, n.f)).collect(),
                    diagnoses,
                    conflicts,
                });
            }
        }
    }
    HsOutcome::Done(diagnoses, conflicts)
}

enum Label {
    Closed,
    Valid,
    Conflict(CompSet),
}

/// Labeling order: non-minimality, (optional) duplicate, reuse,
/// fresh conflict computation.
fn label_node(
    dpi: &Dpi,
    members: &CompSet,
    diagnoses: &[Diagnosis],
    conflicts: &[CompSet],
    queue: &OpenQueue,
    config: &HsTreeConfig,
    metrics: &mut SearchMetrics,
) -> Label {
    if diagnoses.iter().any(|d| d.members.is_subset(members)) {
        return Label::Closed;
    }
    if config.duplicate_check && queue.contains_set(members) {
        return Label::Closed;
    }
    if let Some(c) = conflicts.iter().find(|c| c.is_disjoint(members)) {
        metrics.conflicts_reused += 1;
        return Label::Conflict(c.clone());
    }
    let candidates: CompSet = dpi.all_components().difference(members).copied().collect();
    match find_min_conflict(dpi, &candidates, metrics) {
        MinConflictResult::NoConflict => Label::Valid,
        MinConflictResult::Conflict(c) => Label::Conflict(c),
        MinConflictResult::EmptyConflict => {
            unreachable!("empty conflict is caught at the root")
        }
    }
}
