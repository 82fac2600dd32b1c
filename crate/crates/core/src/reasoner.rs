//! Consistency and violation oracle over which conflicts and diagnoses are
//! defined.
//!
//! Two backends: a propositional CNF checker (DPLL with unit propagation)
//! and an explicit list of minimal conflicts that short-circuits reasoning
//! entirely. Both answer the same question: does a component set S, together
//! with the background and positive measurements, become inconsistent or
//! entail a negative measurement?

use std::collections::BTreeSet;

use thiserror::Error;

use crate::harness::SearchMetrics;
use crate::model::{CompSet, ComponentId};

/// A single literal: variable index plus polarity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Lit {
    pub var: usize,
    pub pos: bool,
}

impl Lit {
    pub fn new(var: usize, pos: bool) -> Self {
        Lit { var, pos }
    }

    pub fn negated(self) -> Self {
        Lit { var: self.var, pos: !self.pos }
    }
}

pub type Clause = Vec<Lit>;

/// A CNF sentence: a conjunction of clauses.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CnfSentence {
    pub clauses: Vec<Clause>,
}

impl CnfSentence {
    pub fn new(clauses: Vec<Clause>) -> Self {
        CnfSentence { clauses }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReasonerError {
    #[error("variable index {0} outside declared variable table of size {1}")]
    UnknownVariable(usize, usize),
    #[error("DPI has no components")]
    EmptyK,
}

/// Propositional DPI contents: per-component sentences plus background,
/// positive and negative measurement sentences over a shared variable table.
#[derive(Clone, Debug)]
pub struct CnfProblem {
    pub var_names: Vec<String>,
    /// One sentence per component, parallel to the DPI's component list.
    pub component_cnf: Vec<CnfSentence>,
    pub background: Vec<Clause>,
    pub positive: Vec<Clause>,
    pub negative: Vec<CnfSentence>,
}

/// Explicit-minimal-conflicts backend: `violates(S)` is a subset scan.
#[derive(Clone, Debug)]
pub struct ExplicitProblem {
    /// Subset-minimal, duplicate-free (enforced on construction).
    pub conflicts: Vec<CompSet>,
}

#[derive(Clone, Debug)]
pub enum Backend {
    Cnf(CnfProblem),
    Explicit(ExplicitProblem),
}

/// The diagnosis problem instance `<K, B, P, N>` with its consistency
/// backend. Components are identified by dense indices into `names`.
#[derive(Clone, Debug)]
pub struct Dpi {
    pub names: Vec<String>,
    pub backend: Backend,
}

impl Dpi {
    pub fn new_cnf(names: Vec<String>, problem: CnfProblem) -> Result<Self, ReasonerError> {
        let nvars = problem.var_names.len();
        let check_clause = |c: &Clause| -> Result<(), ReasonerError> {
            for lit in c {
                if lit.var >= nvars {
                    return Err(ReasonerError::UnknownVariable(lit.var, nvars));
                }
            }
            Ok(())
        };
        for s in problem
            .component_cnf
            .iter()
            .chain(problem.negative.iter())
        {
            for c in &s.clauses {
                check_clause(c)?;
            }
        }
        for c in problem.background.iter().chain(problem.positive.iter()) {
            check_clause(c)?;
        }
        Ok(Dpi { names, backend: Backend::Cnf(problem) })
    }

    /// Builds an explicit-conflicts DPI; the conflict list is deduplicated
    /// and subset-minimized.
    pub fn new_explicit(names: Vec<String>, conflicts: Vec<CompSet>) -> Self {
        let conflicts = minimize_conflict_sets(conflicts);
        Dpi {
            names,
            backend: Backend::Explicit(ExplicitProblem { conflicts }),
        }
    }

    pub fn k_size(&self) -> usize {
        self.names.len()
    }

    /// The full component set K.
    pub fn all_components(&self) -> CompSet {
        (0..self.names.len()).map(ComponentId).collect()
    }

    pub fn name_of(&self, c: ComponentId) -> &str {
        &self.names[c.0]
    }

    pub fn id_by_name(&self, name: &str) -> Option<ComponentId> {
        self.names.iter().position(|n| n == name).map(ComponentId)
    }

    /// Renders a component set by component names, sorted by index.
    pub fn display_set(&self, s: &CompSet) -> String {
        if s.is_empty() {
            return "∅".to_string();
        }
        s.iter()
            .map(|c| self.name_of(*c).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// True iff S ∪ B ∪ P is inconsistent or entails some negative
    /// measurement. Counts one consistency check.
    pub fn violates(&self, s: &CompSet, metrics: &mut SearchMetrics) -> bool {
        metrics.consistency_checks += 1;
        match &self.backend {
            Backend::Explicit(e) => e.conflicts.iter().any(|c| c.is_subset(s)),
            Backend::Cnf(p) => {
                let mut clauses: Vec<&Clause> = Vec::new();
                for c in s {
                    clauses.extend(p.component_cnf[c.0].clauses.iter());
                }
                clauses.extend(p.background.iter());
                clauses.extend(p.positive.iter());
                if !satisfiable(&clauses, p.var_names.len()) {
                    return true;
                }
                // S∪B∪P ⊨ n iff every clause of n is entailed; a clause is
                // entailed iff adding the negations of its literals is unsat
                p.negative.iter().any(|n| {
                    n.clauses.iter().all(|clause| {
                        let negations: Vec<Clause> =
                            clause.iter().map(|l| vec![l.negated()]).collect();
                        let mut with_neg = clauses.clone();
                        with_neg.extend(negations.iter());
                        !satisfiable(&with_neg, p.var_names.len())
                    })
                })
            }
        }
    }

    /// True iff (K \ D) ∪ B ∪ P neither is inconsistent nor entails a
    /// negative measurement.
    pub fn is_diagnosis(&self, d: &CompSet, metrics: &mut SearchMetrics) -> bool {
        let rest: CompSet = self.all_components().difference(d).copied().collect();
        !self.violates(&rest, metrics)
    }
}

/// Satisfiability of a clause set via DPLL with unit propagation and
/// first-unassigned-variable branching. No learning; instances are small.
pub fn satisfiable(clauses: &[&Clause], nvars: usize) -> bool {
    let mut assignment: Vec<Option<bool>> = vec![None; nvars];
    dpll(clauses, &mut assignment)
}

fn dpll(clauses: &[&Clause], assignment: &mut Vec<Option<bool>>) -> bool {
    // unit propagation to fixpoint; remember trail for backtracking
    let mut trail: Vec<usize> = Vec::new();
    loop {
        let mut propagated = false;
        for clause in clauses {
            match clause_state(clause, assignment) {
                ClauseState::Satisfied => {}
                ClauseState::Conflict => {
                    for v in trail {
                        assignment[v] = None;
                    }
                    return false;
                }
                ClauseState::Unit(lit) => {
                    assignment[lit.var] = Some(lit.pos);
                    trail.push(lit.var);
                    propagated = true;
                }
                ClauseState::Open => {}
            }
        }
        if !propagated {
            break;
        }
    }
    let branch_var = assignment.iter().position(|a| a.is_none());
    let result = match branch_var {
        None => true,
        Some(v) => {
            let mut sat = false;
            for value in [true, false] {
                assignment[v] = Some(value);
                if dpll(clauses, assignment) {
                    sat = true;
                    break;
                }
            }
            if !sat {
                assignment[v] = None;
            }
            sat
        }
    };
    if !result {
        for v in trail {
            assignment[v] = None;
        }
    }
    result
}

enum ClauseState {
    Satisfied,
    Conflict,
    Unit(Lit),
    Open,
}

fn clause_state(clause: &Clause, assignment: &[Option<bool>]) -> ClauseState {
    let mut unassigned: Option<Lit> = None;
    let mut unassigned_count = 0;
    for lit in clause {
        match assignment[lit.var] {
            Some(v) if v == lit.pos => return ClauseState::Satisfied,
            Some(_) => {}
            None => {
                unassigned_count += 1;
                unassigned = Some(*lit);
            }
        }
    }
    match unassigned_count {
        0 => ClauseState::Conflict,
        1 => ClauseState::Unit(unassigned.unwrap()),
        _ => ClauseState::Open,
    }
}

/// Drops duplicates and supersets, leaving only the subset-minimal sets.
pub fn minimize_conflict_sets(sets: Vec<CompSet>) -> Vec<CompSet> {
    let unique: Vec<CompSet> = {
        let mut seen: BTreeSet<CompSet> = BTreeSet::new();
        sets.into_iter().filter(|s| seen.insert(s.clone())).collect()
    };
    let mut minimal: Vec<CompSet> = Vec::new();
    for s in &unique {
        if !unique.iter().any(|t| t != s && t.is_subset(s)) {
            minimal.push(s.clone());
        }
    }
    minimal
}

/// The five-axiom propositional instance used throughout the tests:
/// K = {A→¬B, A→B, A→¬C, B→C, A→B∨C}, B = P = ∅, N = {¬A}.
pub fn five_axioms_dpi() -> Dpi {
    let names = (1..=5).map(|i| format!("ax{i}")).collect();
    // variables A=0, B=1, C=2
    let lit = |v: i64| Lit::new(v.unsigned_abs() as usize - 1, v > 0);
    let sent = |clauses: Vec<Vec<i64>>| {
        CnfSentence::new(
            clauses
                .into_iter()
                .map(|c| c.into_iter().map(lit).collect())
                .collect(),
        )
    };
    let problem = CnfProblem {
        var_names: vec!["A".into(), "B".into(), "C".into()],
        component_cnf: vec![
            sent(vec![vec![-1, -2]]),    // ax1: A → ¬B
            sent(vec![vec![-1, 2]]),     // ax2: A → B
            sent(vec![vec![-1, -3]]),    // ax3: A → ¬C
            sent(vec![vec![-2, 3]]),     // ax4: B → C
            sent(vec![vec![-1, 2, 3]]),  // ax5: A → B ∨ C
        ],
        background: vec![],
        positive: vec![],
        negative: vec![sent(vec![vec![-1]])],
    };
    Dpi::new_cnf(names, problem).unwrap()
}
