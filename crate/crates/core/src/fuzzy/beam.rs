use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kg::EntityId;
use crate::query::{plan, PlanOp, QueryGraph};

use super::continuous::DEFAULT_EPSILON;
use super::logic::Logic;
use super::scorer::Scorer;
use super::set::check_unit;

/// Sparse fuzzy set: `(entity, score)` pairs sorted by entity.
type Sparse = Vec<(EntityId, f64)>;

/// Approximate executor that keeps only the `beam_width` best entities after each projection.
pub struct BeamExecutor {
    scorer: Arc<dyn Scorer>,
    logic: Logic,
    beam_width: usize,
    epsilon: f64,
}

impl BeamExecutor {
    pub fn new(scorer: Arc<dyn Scorer>, logic: Logic, beam_width: usize) -> Result<Self> {
        if beam_width == 0 {
            return Err(Error::InvalidInput("beam width must be positive".into()));
        }
        Ok(BeamExecutor { scorer, logic, beam_width, epsilon: DEFAULT_EPSILON })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn beam_width(&self) -> usize {
        self.beam_width
    }

    /// Scored candidates, best first, ties broken by ascending entity id.
    pub fn execute_beam(&self, q: &QueryGraph) -> Result<Vec<(EntityId, f64)>> {
        q.ensure_grounded()?;
        if q.has_negation() {
            return Err(Error::UnsupportedOperator(
                "beam search cannot evaluate negation".into(),
            ));
        }
        let plan = plan(q)?;
        let n = self.scorer.num_entities();
        let mut stack: Vec<Sparse> = Vec::new();
        let underflow = || Error::InvalidState("plan stack underflow".into());
        for op in &plan.ops {
            match *op {
                PlanOp::Anchor { node } => {
                    let e = q.anchor_entity(node)?;
                    crate::error::check_bounds("entity", e as usize, n)?;
                    stack.push(vec![(e, 1.0)]);
                }
                PlanOp::Project { atom } => {
                    let input = stack.pop().ok_or_else(underflow)?;
                    stack.push(self.project(&input, q.atom_relation(atom)?)?);
                }
                PlanOp::Negate => {
                    return Err(Error::UnsupportedOperator(
                        "beam search cannot evaluate negation".into(),
                    ))
                }
                PlanOp::Intersect { arity } | PlanOp::Union { arity } => {
                    if stack.len() < arity {
                        return Err(underflow());
                    }
                    let operands = stack.split_off(stack.len() - arity);
                    let intersect = matches!(op, PlanOp::Intersect { .. });
                    let mut iter = operands.into_iter();
                    let mut acc = iter.next().ok_or_else(underflow)?;
                    for set in iter {
                        acc = self.merge(&acc, &set, intersect);
                    }
                    stack.push(acc);
                }
            }
        }
        let mut result = match (stack.pop(), stack.is_empty()) {
            (Some(result), true) => result,
            _ => return Err(Error::InvalidState("plan left an unbalanced stack".into())),
        };
        result.retain(|&(_, s)| s > 0.0);
        sort_ranked(&mut result);
        Ok(result)
    }

    fn project(&self, input: &Sparse, relation: u32) -> Result<Sparse> {
        let n = self.scorer.num_entities();
        let mut out = vec![0.0f64; n];
        for &(h, weight) in input {
            if weight <= 0.0 || weight < self.epsilon {
                continue;
            }
            let row = self.scorer.row(relation, h)?;
            if row.len() != n {
                return Err(Error::InvalidState(format!(
                    "scorer row has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (o, &s) in out.iter_mut().zip(row.iter()) {
                let v = self.logic.tnorm(weight, check_unit(s)?);
                if v > *o {
                    *o = v;
                }
            }
        }
        let mut ranked: Sparse = out
            .into_iter()
            .enumerate()
            .filter(|&(_, s)| s > 0.0)
            .map(|(e, s)| (e as EntityId, s))
            .collect();
        sort_ranked(&mut ranked);
        ranked.truncate(self.beam_width);
        ranked.sort_by_key(|&(e, _)| e);
        Ok(ranked)
    }

    /// Entities missing from a sparse operand have membership 0.
    fn merge(&self, a: &Sparse, b: &Sparse, intersect: bool) -> Sparse {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len().max(b.len()));
        while i < a.len() || j < b.len() {
            let (e, x, y) = match (a.get(i), b.get(j)) {
                (Some(&(ea, xa)), Some(&(eb, _))) if ea < eb => {
                    i += 1;
                    (ea, xa, 0.0)
                }
                (Some(&(ea, _)), Some(&(eb, yb))) if eb < ea => {
                    j += 1;
                    (eb, 0.0, yb)
                }
                (Some(&(ea, xa)), Some(&(_, yb))) => {
                    i += 1;
                    j += 1;
                    (ea, xa, yb)
                }
                (Some(&(ea, xa)), None) => {
                    i += 1;
                    (ea, xa, 0.0)
                }
                (None, Some(&(eb, yb))) => {
                    j += 1;
                    (eb, 0.0, yb)
                }
                (None, None) => unreachable!(),
            };
            let v = if intersect { self.logic.tnorm(x, y) } else { self.logic.tconorm(x, y) };
            if v > 0.0 {
                out.push((e, v));
            }
        }
        out
    }
}

fn sort_ranked(v: &mut Sparse) {
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}
