//! On-disk JSON format for diagnosis problems. Clauses are lists of signed
//! 1-based variable indices (negative = negated), components carry either a
//! CNF sentence or, with `explicit_conflicts` set, no logic at all.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mbd_core::{CnfProblem, CnfSentence, CompSet, Dpi, Lit};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComponentEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cnf: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DpiFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<String>,
    pub components: Vec<ComponentEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub background: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positive: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negative: Vec<Vec<Vec<i64>>>,
    /// When present, the problem uses the explicit-conflicts backend and the
    /// components must not carry CNF sentences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_conflicts: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<BTreeMap<String, f64>>,
}

fn clause(lits: &[i64], nvars: usize) -> Result<Vec<Lit>> {
    lits.iter()
        .map(|&v| {
            let var = v.unsigned_abs() as usize;
            if v == 0 || var > nvars {
                bail!("literal {v} out of range (1..={nvars})");
            }
            Ok(Lit::new(var - 1, v > 0))
        })
        .collect()
}

impl DpiFile {
    pub fn load(path: &std::path::Path) -> Result<DpiFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Builds the in-memory problem plus the per-component fault
    /// probabilities, when given.
    pub fn to_dpi(&self) -> Result<(Dpi, Option<Vec<f64>>)> {
        let names: Vec<String> = self.components.iter().map(|c| c.name.clone()).collect();
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                bail!("duplicate component name {n:?}");
            }
        }

        let pr = match &self.probabilities {
            None => None,
            Some(map) => {
                let values: Result<Vec<f64>> = names
                    .iter()
                    .map(|n| {
                        map.get(n)
                            .copied()
                            .with_context(|| format!("probabilities missing component {n:?}"))
                    })
                    .collect();
                Some(values?)
            }
        };

        let dpi = match &self.explicit_conflicts {
            Some(conflict_names) => {
                if self.components.iter().any(|c| !c.cnf.is_empty()) {
                    bail!("explicit_conflicts and component CNF are mutually exclusive");
                }
                let conflicts: Result<Vec<CompSet>> = conflict_names
                    .iter()
                    .map(|set| {
                        set.iter()
                            .map(|n| {
                                names
                                    .iter()
                                    .position(|m| m == n)
                                    .map(mbd_core::ComponentId)
                                    .with_context(|| format!("unknown component {n:?}"))
                            })
                            .collect()
                    })
                    .collect();
                Dpi::new_explicit(names, conflicts?)
            }
            None => {
                let nvars = self.variables.len();
                let component_cnf: Result<Vec<CnfSentence>> = self
                    .components
                    .iter()
                    .map(|c| {
                        if c.cnf.is_empty() {
                            bail!("component {:?} has no CNF sentence", c.name);
                        }
                        let clauses: Result<Vec<Vec<Lit>>> =
                            c.cnf.iter().map(|cl| clause(cl, nvars)).collect();
                        Ok(CnfSentence::new(clauses?))
                    })
                    .collect();
                let background: Result<Vec<Vec<Lit>>> =
                    self.background.iter().map(|cl| clause(cl, nvars)).collect();
                let positive: Result<Vec<Vec<Lit>>> =
                    self.positive.iter().map(|cl| clause(cl, nvars)).collect();
                let negative: Result<Vec<CnfSentence>> = self
                    .negative
                    .iter()
                    .map(|sentence| {
                        let clauses: Result<Vec<Vec<Lit>>> =
                            sentence.iter().map(|cl| clause(cl, nvars)).collect();
                        Ok(CnfSentence::new(clauses?))
                    })
                    .collect();
                Dpi::new_cnf(
                    names,
                    CnfProblem {
                        var_names: self.variables.clone(),
                        component_cnf: component_cnf?,
                        background: background?,
                        positive: positive?,
                        negative: negative?,
                    },
                )?
            }
        };
        Ok((dpi, pr))
    }

    /// Serialization stability check used by the test suite.
    #[cfg(test)]
    pub fn round_trip_stable(&self) -> Result<bool> {
        let once = self.to_json()?;
        let reparsed: DpiFile = serde_json::from_str(&once)?;
        Ok(reparsed.to_json()? == once && reparsed == *self)
    }


    pub fn from_dpi(dpi: &Dpi, pr: Option<&[f64]>) -> DpiFile {
        let signed = |l: &Lit| if l.pos { l.var as i64 + 1 } else { -(l.var as i64 + 1) };
        let probabilities = pr.map(|values| {
            dpi.names
                .iter()
                .cloned()
                .zip(values.iter().copied())
                .collect::<BTreeMap<String, f64>>()
        });
        match &dpi.backend {
            mbd_core::Backend::Explicit(problem) => DpiFile {
                variables: Vec::new(),
                components: dpi
                    .names
                    .iter()
                    .map(|n| ComponentEntry { name: n.clone(), cnf: Vec::new() })
                    .collect(),
                background: Vec::new(),
                positive: Vec::new(),
                negative: Vec::new(),
                explicit_conflicts: Some(
                    problem
                        .conflicts
                        .iter()
                        .map(|c| c.iter().map(|id| dpi.names[id.0].clone()).collect())
                        .collect(),
                ),
                probabilities,
            },
            mbd_core::Backend::Cnf(problem) => DpiFile {
                variables: problem.var_names.clone(),
                components: dpi
                    .names
                    .iter()
                    .zip(&problem.component_cnf)
                    .map(|(n, s)| ComponentEntry {
                        name: n.clone(),
                        cnf: s.clauses.iter().map(|cl| cl.iter().map(signed).collect()).collect(),
                    })
                    .collect(),
                background: problem
                    .background
                    .iter()
                    .map(|cl| cl.iter().map(signed).collect())
                    .collect(),
                positive: problem
                    .positive
                    .iter()
                    .map(|cl| cl.iter().map(signed).collect())
                    .collect(),
                negative: problem
                    .negative
                    .iter()
                    .map(|s| s.clauses.iter().map(|cl| cl.iter().map(signed).collect()).collect())
                    .collect(),
                explicit_conflicts: None,
                probabilities,
            },
        }
    }
}
