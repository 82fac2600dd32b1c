//! Model-based diagnosis over propositional or explicit-conflict problem
//! instances: minimal-conflict computation, three hitting-set search
//! strategies (queue-based, linear-space recursive, and a hybrid of the
//! two), and a sequential diagnosis loop with probe selection.

pub mod conflict;
pub mod harness;
pub mod hbfhs;
pub mod hstree;
pub mod model;
pub mod rbfhs;
pub mod reasoner;
pub mod sequential;

pub use conflict::{find_min_conflict, MinConflictResult};
pub use harness::{
    brute_force_min_conflicts, brute_force_min_diagnoses, generate_random_dpi, Diagnosis,
    GenBackend, GeneratedDpi, GeneratorParams, SearchMetrics, SearchResult, SwitchInfo,
};
pub use hbfhs::{hbf_hs, HbfConfig, SwitchCriterion};
pub use hstree::{hs_tree, HsTreeConfig};
pub use model::{
    comp_set, cost_adjust, diagnosis_probability, normalize_probabilities, CompSet, ComponentId,
    Cost, CostMode, CostModel, Ld, ModelError, DEFAULT_ADJUSTMENT,
};
pub use rbfhs::{rbf_hs, RbfConfig};
pub use reasoner::{
    five_axioms_dpi, Backend, Clause, CnfProblem, CnfSentence, Dpi, ExplicitProblem, Lit,
    ReasonerError,
};
pub use sequential::{
    run_session, select_probe_ent, select_probe_spl, ProbeRecord, Selector, Session,
    SessionConfig, SessionError, SessionResult,
};
