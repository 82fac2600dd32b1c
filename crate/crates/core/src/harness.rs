//! Instrumentation and evaluation support: search metrics, the brute-force
//! oracle, and a seeded random problem generator.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CompSet, ComponentId, Cost};
use crate::reasoner::{CnfProblem, CnfSentence, Dpi, Lit, ReasonerError};

/// Where and why the hybrid search left its first phase.
#[derive(Clone, Debug)]
pub struct SwitchInfo {
    pub nodes_generated_at_switch: u64,
    pub diagnoses_at_switch: Vec<CompSet>,
    pub conflicts_at_switch: usize,
    /// Deduplicated open nodes, in queue order, that became the virtual
    /// root's child list.
    pub virtual_children: Vec<CompSet>,
    /// First node explored after the switch, with the bound it was given.
    pub first_explored: Option<CompSet>,
    pub first_bound: Option<Cost>,
    /// High-water mark of child-list entries held by recursion frames
    /// after the switch (excludes the carried-over storage).
    pub post_switch_peak: usize,
}

/// Counters shared by all search strategies.
#[derive(Clone, Debug, Default)]
pub struct SearchMetrics {
    /// Nodes created, including the root.
    pub nodes_generated: u64,
    /// Nodes labeled (a node revisited by the recursive search counts again).
    pub nodes_explored: u64,
    /// High-water mark of simultaneously stored nodes; for the queue-based
    /// search this covers the open queue plus collected diagnoses and
    /// conflicts, for the recursive search the active child-list entries.
    pub peak_stored_nodes: usize,
    /// Fresh minimal-conflict computations that returned a conflict.
    pub conflicts_computed: u64,
    /// Labelings served from the stored conflicts.
    pub conflicts_reused: u64,
    /// Theorem-prover calls (consistency/entailment checks).
    pub consistency_checks: u64,
    pub wall_time: Duration,
    /// Set by tracing configs: every labeled node in exploration order.
    pub exploration_log: Option<Vec<CompSet>>,
    pub switch: Option<SwitchInfo>,
}

impl SearchMetrics {
    pub fn note_stored(&mut self, stored: usize) {
        self.peak_stored_nodes = self.peak_stored_nodes.max(stored);
    }
}

/// A minimal diagnosis with the cost it was ranked by.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnosis {
    pub members: CompSet,
    pub cost: Cost,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// In non-increasing cost order (discovery order of the search).
    pub diagnoses: Vec<Diagnosis>,
    /// Minimal conflicts computed or reused along the way.
    pub conflicts: Vec<CompSet>,
    pub metrics: SearchMetrics,
}

impl SearchResult {
    pub fn diagnosis_sets(&self) -> Vec<CompSet> {
        self.diagnoses.iter().map(|d| d.members.clone()).collect()
    }
}

const BRUTE_FORCE_LIMIT: usize = 20;

fn mask_to_set(mask: u32, k: usize) -> CompSet {
    (0..k).filter(|i| mask & (1 << i) != 0).map(ComponentId).collect()
}

/// All minimal diagnoses by subset enumeration in cardinality order.
/// Ground truth for the search strategies; only for small problems.
pub fn brute_force_min_diagnoses(dpi: &Dpi) -> Vec<CompSet> {
    let k = dpi.k_size();
    assert!(k <= BRUTE_FORCE_LIMIT, "brute force is limited to {BRUTE_FORCE_LIMIT} components");
    let mut metrics = SearchMetrics::default();
    let mut found: Vec<CompSet> = Vec::new();
    for size in 0..=k {
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let candidate = mask_to_set(mask, k);
            if found.iter().any(|d| d.is_subset(&candidate)) {
                continue;
            }
            if dpi.is_diagnosis(&candidate, &mut metrics) {
                found.push(candidate);
            }
        }
    }
    found
}

/// All minimal conflicts by subset enumeration in cardinality order.
pub fn brute_force_min_conflicts(dpi: &Dpi) -> Vec<CompSet> {
    let k = dpi.k_size();
    assert!(k <= BRUTE_FORCE_LIMIT, "brute force is limited to {BRUTE_FORCE_LIMIT} components");
    let mut metrics = SearchMetrics::default();
    let mut found: Vec<CompSet> = Vec::new();
    for size in 0..=k {
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let candidate = mask_to_set(mask, k);
            if found.iter().any(|c| c.is_subset(&candidate)) {
                continue;
            }
            if dpi.violates(&candidate, &mut metrics) {
                found.push(candidate);
            }
        }
    }
    found
}

/// Which kind of problem the generator emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenBackend {
    Explicit,
    Cnf,
}

#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub seed: u64,
    pub components: usize,
    pub conflict_count: usize,
    /// Inclusive bounds on conflict size (explicit backend only).
    pub conflict_size: (usize, usize),
    /// Fault probabilities are drawn uniformly from this open interval;
    /// it must stay inside (0, 0.5) so MaxProb costs are well-defined.
    pub pr_range: (f64, f64),
    pub backend: GenBackend,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 0,
            components: 8,
            conflict_count: 4,
            conflict_size: (2, 4),
            pr_range: (0.05, 0.45),
            backend: GenBackend::Explicit,
        }
    }
}

/// A generated problem plus per-component fault probabilities.
pub struct GeneratedDpi {
    pub dpi: Dpi,
    pub pr: Vec<f64>,
}

/// Builds a random solvable problem. The same parameters always produce the
/// same problem.
pub fn generate_random_dpi(params: &GeneratorParams) -> Result<GeneratedDpi, ReasonerError> {
    assert!(params.components >= 2, "need at least two components");
    assert!(
        params.pr_range.0 > 0.0 && params.pr_range.1 < 0.5 && params.pr_range.0 <= params.pr_range.1,
        "pr range must lie inside (0, 0.5)"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let k = params.components;
    let names: Vec<String> = (0..k).map(|i| format!("ax{}", i + 1)).collect();
    let pr: Vec<f64> = (0..k).map(|_| rng.gen_range(params.pr_range.0..params.pr_range.1)).collect();

    let dpi = match params.backend {
        GenBackend::Explicit => {
            let lo = params.conflict_size.0.max(1).min(k);
            let hi = params.conflict_size.1.max(lo).min(k);
            let mut conflicts = Vec::with_capacity(params.conflict_count);
            while conflicts.len() < params.conflict_count {
                let size = rng.gen_range(lo..=hi);
                let mut set = CompSet::new();
                while set.len() < size {
                    set.insert(ComponentId(rng.gen_range(0..k)));
                }
                conflicts.push(set);
            }
            Dpi::new_explicit(names, conflicts)
        }
        GenBackend::Cnf => generate_cnf_dpi(&mut rng, names)?,
    };
    Ok(GeneratedDpi { dpi, pr })
}

/// Random implication circuit: every component is a clause ¬a ∨ l where l
/// is a random literal over a pool of variables, the positive measurement
/// asserts `a`, and the negative measurement forbids nothing extra — the
/// clash comes from components forcing a variable both ways. Regenerates
/// until at least one clash (conflict) exists.
fn generate_cnf_dpi(rng: &mut ChaCha8Rng, names: Vec<String>) -> Result<Dpi, ReasonerError> {
    let k = names.len();
    let pool = (k / 2).max(2);
    // var 0 is `a`; vars 1..=pool are the implied signals
    let var_names: Vec<String> = std::iter::once("a".to_string())
        .chain((1..=pool).map(|i| format!("x{i}")))
        .collect();
    loop {
        let mut choices: Vec<(usize, bool)> = Vec::with_capacity(k);
        for _ in 0..k {
            choices.push((rng.gen_range(1..=pool), rng.gen_bool(0.5)));
        }
        let clash = choices
            .iter()
            .any(|&(v, p)| choices.iter().any(|&(v2, p2)| v2 == v && p2 != p));
        if !clash {
            continue;
        }
        let components: Vec<CnfSentence> = choices
            .iter()
            .map(|&(v, p)| CnfSentence::new(vec![vec![Lit::new(0, false), Lit::new(v, p)]]))
            .collect();
        let problem = CnfProblem {
            var_names: var_names.clone(),
            component_cnf: components,
            background: Vec::new(),
            positive: vec![vec![Lit::new(0, true)]],
            negative: vec![],
        };
        return Dpi::new_cnf(names, problem);
    }
}
