use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::RelationId;
use crate::query::{plan, to_dnf, PlanOp, QueryGraph};

use super::logic::Logic;
use super::scorer::Scorer;
use super::set::{check_unit, FuzzySet};

/// Default support threshold below which heads are not expanded.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// How union groups are evaluated by the continuous executor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionStrategy {
    /// Elementwise t-conorm at the merge node.
    #[default]
    Conorm,
    /// Rewrite to DNF, run every conjunctive branch, take the elementwise max.
    DnfMax,
}

/// Row fetches and score entries read by projections.
#[derive(Debug, Default)]
pub struct ProjectionCounter {
    rows: AtomicU64,
    entries: AtomicU64,
}

impl ProjectionCounter {
    pub fn rows(&self) -> u64 {
        self.rows.load(Ordering::Relaxed)
    }

    pub fn entries(&self) -> u64 {
        self.entries.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.rows.store(0, Ordering::Relaxed);
        self.entries.store(0, Ordering::Relaxed);
    }
}

/// Executes tree queries over fuzzy sets: projection is `max_h ⊤(in[h], S_r[h, t])`.
pub struct ContinuousExecutor {
    scorer: Arc<dyn Scorer>,
    logic: Logic,
    epsilon: f64,
    union: UnionStrategy,
    counter: ProjectionCounter,
}

impl ContinuousExecutor {
    pub fn new(scorer: Arc<dyn Scorer>, logic: Logic) -> Self {
        ContinuousExecutor {
            scorer,
            logic,
            epsilon: DEFAULT_EPSILON,
            union: UnionStrategy::Conorm,
            counter: ProjectionCounter::default(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_union(mut self, union: UnionStrategy) -> Self {
        self.union = union;
        self
    }

    pub fn logic(&self) -> Logic {
        self.logic
    }

    pub fn counter(&self) -> &ProjectionCounter {
        &self.counter
    }

    pub fn num_entities(&self) -> usize {
        self.scorer.num_entities()
    }

    pub fn project(&self, input: &FuzzySet, relation: RelationId) -> Result<FuzzySet> {
        let n = self.scorer.num_entities();
        if input.len() != n {
            return Err(Error::InvalidState(format!(
                "input has {} entries, scorer covers {n} entities",
                input.len()
            )));
        }
        let mut out = vec![0.0f64; n];
        for (h, &weight) in input.values().iter().enumerate() {
            if weight <= 0.0 || weight < self.epsilon {
                continue;
            }
            let row = self.scorer.row(relation, h as u32)?;
            if row.len() != n {
                return Err(Error::InvalidState(format!(
                    "scorer row has {} entries, expected {n}",
                    row.len()
                )));
            }
            self.counter.rows.fetch_add(1, Ordering::Relaxed);
            self.counter.entries.fetch_add(n as u64, Ordering::Relaxed);
            for (o, &s) in out.iter_mut().zip(row.iter()) {
                let v = self.logic.tnorm(weight, check_unit(s)?);
                if v > *o {
                    *o = v;
                }
            }
        }
        Ok(FuzzySet::from_unchecked(out))
    }

    /// Target membership of every entity.
    pub fn execute(&self, q: &QueryGraph) -> Result<FuzzySet> {
        if self.union == UnionStrategy::DnfMax && !q.unions.is_empty() {
            let mut acc: Option<Vec<f64>> = None;
            for branch in to_dnf(q) {
                let set = self.execute_conorm(&branch)?.into_vec();
                acc = Some(match acc {
                    None => set,
                    Some(prev) => prev.iter().zip(set).map(|(a, b)| a.max(b)).collect(),
                });
            }
            return Ok(FuzzySet::from_unchecked(acc.unwrap_or_default()));
        }
        self.execute_conorm(q)
    }

    fn execute_conorm(&self, q: &QueryGraph) -> Result<FuzzySet> {
        q.ensure_grounded()?;
        let plan = plan(q)?;
        let n = self.scorer.num_entities();
        let mut stack: Vec<FuzzySet> = Vec::new();
        let underflow = || Error::InvalidState("plan stack underflow".into());
        for op in &plan.ops {
            match *op {
                PlanOp::Anchor { node } => {
                    let e = q.anchor_entity(node)?;
                    crate::error::check_bounds("entity", e as usize, n)?;
                    stack.push(FuzzySet::indicator(n, [e]));
                }
                PlanOp::Project { atom } => {
                    let input = stack.pop().ok_or_else(underflow)?;
                    stack.push(self.project(&input, q.atom_relation(atom)?)?);
                }
                PlanOp::Negate => {
                    let top = stack.pop().ok_or_else(underflow)?;
                    stack.push(top.complement());
                }
                PlanOp::Intersect { arity } | PlanOp::Union { arity } => {
                    if stack.len() < arity {
                        return Err(underflow());
                    }
                    let operands = stack.split_off(stack.len() - arity);
                    let mut iter = operands.into_iter();
                    let mut acc = iter.next().ok_or_else(underflow)?;
                    for set in iter {
                        acc = if matches!(op, PlanOp::Intersect { .. }) {
                            self.logic.intersect(&acc, &set)?
                        } else {
                            self.logic.union(&acc, &set)?
                        };
                    }
                    stack.push(acc);
                }
            }
        }
        match (stack.pop(), stack.is_empty()) {
            (Some(result), true) => Ok(result),
            _ => Err(Error::InvalidState("plan left an unbalanced stack".into())),
        }
    }
}

/// One-shot projection with the default ε.
pub fn project(
    input: &FuzzySet,
    relation: RelationId,
    scorer: Arc<dyn Scorer>,
    logic: Logic,
) -> Result<FuzzySet> {
    ContinuousExecutor::new(scorer, logic).project(input, relation)
}

/// One-shot continuous execution with default settings.
pub fn execute(q: &QueryGraph, scorer: Arc<dyn Scorer>, logic: Logic) -> Result<FuzzySet> {
    ContinuousExecutor::new(scorer, logic).execute(q)
}
