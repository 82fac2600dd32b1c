//! Core domain types: components, component sets, costs and the
//! fault-probability model that drives best-first search.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Dense 0-based index of a component (axiom) within a DPI's `K`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ComponentId(pub usize);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of components, kept sorted. Nodes, conflicts and diagnoses are
/// all component sets; only their role differs.
pub type CompSet = BTreeSet<ComponentId>;

/// Builds a `CompSet` from raw indices. Test and fixture helper.
pub fn comp_set<I: IntoIterator<Item = usize>>(ids: I) -> CompSet {
    ids.into_iter().map(ComponentId).collect()
}

/// Renders a component set as `{a,b,c}` using raw indices.
pub fn fmt_comp_set(s: &CompSet) -> String {
    let inner: Vec<String> = s.iter().map(|c| c.0.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("component {0} outside K (|K| = {1})")]
    ComponentOutsideK(usize, usize),
    #[error("probability for component {0} is {1}, must lie in (0,1)")]
    ProbabilityOutOfRange(usize, f64),
    #[error("cost-adjustment constant {0} must lie in (0,0.5)")]
    BadAdjustmentConstant(f64),
    #[error("MaxProb model requires pr(ax) < 0.5 for every component; component {0} has {1}")]
    NotCostAdjusted(usize, f64),
}

/// Node score. Higher is better; `NegInf` is the sentinel used for dummy
/// children and hopeless/exhausted subtrees.
#[derive(Clone, Copy, Debug)]
pub enum Cost {
    NegInf,
    Finite(f64),
}

impl Cost {
    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Cost::NegInf)
    }

    /// The stored finite score; panics on `NegInf`.
    pub fn finite(&self) -> f64 {
        match self {
            Cost::Finite(v) => *v,
            Cost::NegInf => panic!("NegInf has no finite value"),
        }
    }
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cost::NegInf, Cost::NegInf) => true,
            (Cost::Finite(a), Cost::Finite(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Cost::NegInf, Cost::NegInf) => Equal,
            (Cost::NegInf, Cost::Finite(_)) => Less,
            (Cost::Finite(_), Cost::NegInf) => Greater,
            // finite scores are never NaN: log of probabilities in (0,1),
            // or negated cardinalities
            (Cost::Finite(a), Cost::Finite(b)) => a.partial_cmp(b).unwrap(),
        }
    }
}

/// Preference criterion for the search: most probable first, or smallest
/// cardinality first.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CostMode {
    MaxProb,
    MinCard,
}

/// Per-component fault probabilities plus the active cost mode.
///
/// MaxProb scores are log fault-pattern probabilities;
/// MinCard scores are negated cardinalities. Both give a total order with
/// "higher = better".
#[derive(Clone, Debug)]
pub struct CostModel {
    pub mode: CostMode,
    pr: Vec<f64>,
    /// log(pr_i / (1 - pr_i)) per component (MaxProb only).
    log_odds: Vec<f64>,
    /// log prod_i (1 - pr_i), the score of the empty set (MaxProb only).
    base: f64,
}

impl CostModel {
    /// MaxProb model over cost-adjusted probabilities (each must be < 0.5,
    /// which makes f strictly anti-monotonic under superset).
    pub fn max_prob(pr: &[f64]) -> Result<Self, ModelError> {
        for (i, &p) in pr.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(ModelError::ProbabilityOutOfRange(i, p));
            }
            if p >= 0.5 {
                return Err(ModelError::NotCostAdjusted(i, p));
            }
        }
        let log_odds = pr.iter().map(|&p| p.ln() - (1.0 - p).ln()).collect();
        let base = pr.iter().map(|&p| (1.0 - p).ln()).sum();
        Ok(CostModel {
            mode: CostMode::MaxProb,
            pr: pr.to_vec(),
            log_odds,
            base,
        })
    }

    /// MinCard model; probabilities play no role.
    pub fn min_card(k: usize) -> Self {
        CostModel {
            mode: CostMode::MinCard,
            pr: vec![0.25; k],
            log_odds: Vec::new(),
            base: 0.0,
        }
    }

    pub fn component_count(&self) -> usize {
        self.pr.len()
    }

    pub fn pr(&self) -> &[f64] {
        &self.pr
    }

    /// Intrinsic cost f(n) of a node with the given members.
    ///
    /// MaxProb: log of the fault-pattern probability, computed as the empty-set
    /// base plus the members' log-odds. The member terms are summed in
    /// ascending value order, so nodes whose members carry the same multiset
    /// of probabilities get bit-identical scores and FIFO tie-breaking works
    /// on exact equality.
    pub fn f_cost(&self, members: &CompSet) -> Cost {
        match self.mode {
            CostMode::MinCard => Cost::Finite(-(members.len() as f64)),
            CostMode::MaxProb => {
                let mut terms: Vec<f64> =
                    members.iter().map(|c| self.log_odds[c.0]).collect();
                terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Cost::Finite(self.base + terms.iter().sum::<f64>())
            }
        }
    }
}

/// Probability of the fault pattern X under independent component failure:
/// prod_{ax in X} pr(ax) * prod_{ax in K\X} (1 - pr(ax)).
///
/// Accumulated in log space; exponentiated only for the returned value.
pub fn diagnosis_probability(x: &CompSet, pr: &[f64]) -> Result<f64, ModelError> {
    for c in x {
        if c.0 >= pr.len() {
            return Err(ModelError::ComponentOutsideK(c.0, pr.len()));
        }
    }
    for (i, &p) in pr.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) {
            return Err(ModelError::ProbabilityOutOfRange(i, p));
        }
    }
    let mut log = 0.0;
    for (i, &p) in pr.iter().enumerate() {
        log += if x.contains(&ComponentId(i)) {
            p.ln()
        } else {
            (1.0 - p).ln()
        };
    }
    Ok(log.exp())
}

/// Normalizes the probabilities of a diagnosis list so they sum to 1.
pub fn normalize_probabilities(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    values.iter().map(|v| v / total).collect()
}

/// Scales every probability by `c` in (0,0.5), guaranteeing pr(ax) < 0.5
/// while preserving all probability ratios.
pub fn cost_adjust(pr: &[f64], c: f64) -> Result<Vec<f64>, ModelError> {
    if !(c > 0.0 && c < 0.5) {
        return Err(ModelError::BadAdjustmentConstant(c));
    }
    for (i, &p) in pr.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) {
            return Err(ModelError::ProbabilityOutOfRange(i, p));
        }
    }
    Ok(pr.iter().map(|&p| c * p).collect())
}

/// Default adjustment constant when a model needs cost-adjusting.
pub const DEFAULT_ADJUSTMENT: f64 = 0.25;

/// Number of leading diagnoses to compute.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Ld {
    All,
    Limit(usize),
}

impl Ld {
    pub fn reached(&self, found: usize) -> bool {
        match self {
            Ld::All => false,
            Ld::Limit(n) => found >= *n,
        }
    }
}
