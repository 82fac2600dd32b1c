//! Sequential diagnosis: interleaves diagnosis search with probe selection
//! until the actual fault is isolated. Probes ask whether a single component
//! is healthy; answers shrink the problem until one diagnosis remains.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::harness::SearchMetrics;
use crate::model::{
    cost_adjust, diagnosis_probability, normalize_probabilities, CompSet, ComponentId, CostModel,
    CostMode, Ld, DEFAULT_ADJUSTMENT,
};
use crate::rbfhs::{rbf_hs, RbfConfig};
use crate::reasoner::{Backend, Dpi};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("the assumed actual diagnosis is not a minimal diagnosis of the problem")]
    ActualNotMinimal,
    #[error("no discriminating probe exists for the current leading diagnoses")]
    NoProbe,
    #[error("a probe answer made the problem unsolvable")]
    InconsistentAnswer,
    #[error("probability vector length {0} does not match component count {1}")]
    BadProbabilities(usize, usize),
}

/// How the next probe is chosen among the leading diagnoses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    /// Split-in-half: balance the number of leading diagnoses eliminated by
    /// either answer.
    Spl,
    /// Entropy: pick the component whose fault posterior is closest to 1/2.
    Ent,
}

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub selector: Selector,
    pub mode: CostMode,
    /// Leading diagnoses computed per iteration.
    pub ld: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { selector: Selector::Ent, mode: CostMode::MaxProb, ld: 6 }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeRecord {
    pub component: String,
    pub healthy: bool,
}

#[derive(Clone, Debug)]
pub struct SessionResult {
    pub probes: Vec<ProbeRecord>,
    /// Component names of the isolated fault, matching the assumed actual
    /// diagnosis.
    pub isolated: BTreeSet<String>,
    pub metrics: SearchMetrics,
}

/// Split-in-half choice over the current leading diagnoses: minimize the
/// worse-case number of surviving diagnoses, ties to the lowest component
/// index. Returns `None` when fewer than two diagnoses are given.
pub fn select_probe_spl(k: usize, leading: &[CompSet]) -> Option<ComponentId> {
    if leading.len() < 2 {
        return None;
    }
    let total = leading.len();
    let mut best: Option<(usize, ComponentId)> = None;
    for i in 0..k {
        let ax = ComponentId(i);
        let with = leading.iter().filter(|d| d.contains(&ax)).count();
        let worst = with.max(total - with);
        if worst == total {
            continue; // non-discriminating
        }
        if best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, ax));
        }
    }
    best.map(|(_, ax)| ax)
}

/// Entropy-based choice: with the leading diagnoses' probabilities
/// normalized to 1, pick the component whose probability of being at fault
/// is closest to 1/2 (maximal expected information gain). Ties go to the
/// lowest component index.
pub fn select_probe_ent(k: usize, leading: &[CompSet], pr: &[f64]) -> Option<ComponentId> {
    if leading.len() < 2 {
        return None;
    }
    let raw: Vec<f64> = leading
        .iter()
        .map(|d| diagnosis_probability(d, pr).expect("valid probabilities"))
        .collect();
    let p = normalize_probabilities(&raw);
    let mut best: Option<(f64, ComponentId)> = None;
    for i in 0..k {
        let ax = ComponentId(i);
        let q: f64 = leading
            .iter()
            .zip(&p)
            .filter(|(d, _)| d.contains(&ax))
            .map(|(_, pd)| pd)
            .sum();
        if q <= 0.0 || q >= 1.0 {
            continue; // answer is already determined, no information
        }
        let score = (q - 0.5).abs();
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, ax));
        }
    }
    best.map(|(_, ax)| ax)
}

/// One diagnosis session state: the shrinking problem plus the
/// fault-probability vector kept parallel to its components.
#[derive(Clone, Debug)]
pub struct Session {
    pub dpi: Dpi,
    pub pr: Vec<f64>,
    /// Components already confirmed faulty and removed from the problem.
    pub confirmed: BTreeSet<String>,
}

impl Session {
    pub fn new(dpi: Dpi, pr: Vec<f64>) -> Result<Self, SessionError> {
        if pr.len() != dpi.k_size() {
            return Err(SessionError::BadProbabilities(pr.len(), dpi.k_size()));
        }
        Ok(Session { dpi, pr, confirmed: BTreeSet::new() })
    }

    /// Incorporates a probe answer. A healthy component becomes part of the
    /// background (it can no longer appear in any diagnosis); a faulty one
    /// is recorded as confirmed and removed from the problem.
    pub fn apply_answer(&mut self, target: ComponentId, healthy: bool) -> Result<(), SessionError> {
        let t = target.0;
        assert!(t < self.dpi.k_size(), "probe target outside K");
        if !healthy {
            self.confirmed.insert(self.dpi.names[t].clone());
        }
        self.pr.remove(t);
        self.dpi.names.remove(t);

        let reindex = |set: &CompSet| -> CompSet {
            set.iter()
                .filter(|c| c.0 != t)
                .map(|c| if c.0 > t { ComponentId(c.0 - 1) } else { *c })
                .collect()
        };

        let rebuilt = match &mut self.dpi.backend {
            Backend::Explicit(problem) => {
                let mut next = Vec::new();
                for c in &problem.conflicts {
                    if c.contains(&target) {
                        if healthy {
                            // the component now behaves correctly, so the
                            // conflict must be resolved among the others
                            let shrunk = reindex(c);
                            if shrunk.is_empty() {
                                return Err(SessionError::InconsistentAnswer);
                            }
                            next.push(shrunk);
                        }
                        // confirmed faulty: the conflict is already hit
                    } else {
                        next.push(reindex(c));
                    }
                }
                Some(next)
            }
            Backend::Cnf(problem) => {
                let sentence = problem.component_cnf.remove(t);
                if healthy {
                    problem.background.extend(sentence.clauses);
                }
                None
            }
        };
        if let Some(conflicts) = rebuilt {
            self.dpi = Dpi::new_explicit(std::mem::take(&mut self.dpi.names), conflicts);
        }
        Ok(())
    }

    fn cost_model(&self, mode: CostMode) -> CostModel {
        match mode {
            CostMode::MinCard => CostModel::min_card(self.dpi.k_size()),
            CostMode::MaxProb => match CostModel::max_prob(&self.pr) {
                Ok(m) => m,
                Err(_) => {
                    let adjusted = cost_adjust(&self.pr, DEFAULT_ADJUSTMENT)
                        .expect("default adjustment constant is valid");
                    CostModel::max_prob(&adjusted).expect("adjusted probabilities are < 0.5")
                }
            },
        }
    }
}

/// Simulated session: the oracle answers probes according to `actual`, a
/// minimal diagnosis of `dpi` given by component names. Returns the probe
/// transcript; the isolated fault always equals `actual`.
pub fn run_session(
    dpi: &Dpi,
    pr: &[f64],
    actual: &BTreeSet<String>,
    config: &SessionConfig,
) -> Result<SessionResult, SessionError> {
    let actual_ids: Option<CompSet> =
        actual.iter().map(|n| dpi.id_by_name(n)).collect();
    let actual_ids = actual_ids.ok_or(SessionError::ActualNotMinimal)?;
    let mut check = SearchMetrics::default();
    if !dpi.is_diagnosis(&actual_ids, &mut check) {
        return Err(SessionError::ActualNotMinimal);
    }
    for ax in &actual_ids {
        let mut smaller = actual_ids.clone();
        smaller.remove(ax);
        if dpi.is_diagnosis(&smaller, &mut check) {
            return Err(SessionError::ActualNotMinimal);
        }
    }

    let mut session = Session::new(dpi.clone(), pr.to_vec())?;
    let mut probes = Vec::new();
    let mut metrics = SearchMetrics::default();

    loop {
        let model = session.cost_model(config.mode);
        let result = rbf_hs(&session.dpi, &model, Ld::Limit(config.ld), &RbfConfig::default());
        accumulate(&mut metrics, &result.metrics);
        let leading = result.diagnosis_sets();
        if leading.len() <= 1 {
            let mut isolated = session.confirmed.clone();
            if let Some(last) = leading.first() {
                isolated.extend(last.iter().map(|c| session.dpi.name_of(*c).to_string()));
            }
            metrics.note_stored(result.metrics.peak_stored_nodes);
            return Ok(SessionResult { probes, isolated, metrics });
        }

        let k = session.dpi.k_size();
        let target = match config.selector {
            Selector::Spl => select_probe_spl(k, &leading),
            Selector::Ent => select_probe_ent(k, &leading, &session.pr),
        }
        .ok_or(SessionError::NoProbe)?;

        let name = session.dpi.name_of(target).to_string();
        let healthy = !actual.contains(&name);
        probes.push(ProbeRecord { component: name, healthy });
        session.apply_answer(target, healthy)?;
    }
}

fn accumulate(total: &mut SearchMetrics, step: &SearchMetrics) {
    total.nodes_generated += step.nodes_generated;
    total.nodes_explored += step.nodes_explored;
    total.peak_stored_nodes = total.peak_stored_nodes.max(step.peak_stored_nodes);
    total.conflicts_computed += step.conflicts_computed;
    total.conflicts_reused += step.conflicts_reused;
    total.consistency_checks += step.consistency_checks;
    total.wall_time += step.wall_time;
}
