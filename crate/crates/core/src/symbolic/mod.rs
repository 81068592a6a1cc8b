//! Exact query answering over a single graph layer.

mod bgq;

use serde::{Deserialize, Serialize};

pub use bgq::{execute_bgq, Mapping};

use crate::error::{Error, Result};
use crate::kg::{Direction, EntityId, KnowledgeGraph};
use crate::query::{classify, plan, to_dnf, PatternClass, PlanOp, QueryGraph};

/// Easy, hard and false-positive answers of a query across two nested layers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerLabels {
    pub easy: Vec<EntityId>,
    pub hard: Vec<EntityId>,
    pub false_positive: Vec<EntityId>,
}

fn to_sorted(set: &[bool]) -> Vec<EntityId> {
    set.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| i as EntityId)
        .collect()
}

/// Bottom-up set evaluation of a path or tree query. Negated atoms are
/// complemented against the full entity set of `graph`.
pub fn execute_tree(q: &QueryGraph, graph: &KnowledgeGraph) -> Result<Vec<EntityId>> {
    q.ensure_grounded()?;
    let plan = plan(q)?;
    let n = graph.num_entities();
    let mut stack: Vec<Vec<bool>> = Vec::new();
    let underflow = || Error::InvalidState("plan stack underflow".into());
    for op in &plan.ops {
        match *op {
            PlanOp::Anchor { node } => {
                let e = q.anchor_entity(node)?;
                crate::error::check_bounds("entity", e as usize, n)?;
                let mut set = vec![false; n];
                set[e as usize] = true;
                stack.push(set);
            }
            PlanOp::Project { atom } => {
                let r = q.atom_relation(atom)?;
                crate::error::check_bounds("relation", r as usize, graph.num_relations())?;
                let input = stack.pop().ok_or_else(underflow)?;
                let mut out = vec![false; n];
                for (h, _) in input.iter().enumerate().filter(|(_, &m)| m) {
                    for &t in graph.neighbors_unchecked(r, h as EntityId, Direction::Forward) {
                        out[t as usize] = true;
                    }
                }
                stack.push(out);
            }
            PlanOp::Negate => {
                let top = stack.last_mut().ok_or_else(underflow)?;
                top.iter_mut().for_each(|m| *m = !*m);
            }
            PlanOp::Intersect { arity } | PlanOp::Union { arity } => {
                if stack.len() < arity {
                    return Err(underflow());
                }
                let operands = stack.split_off(stack.len() - arity);
                let intersect = matches!(op, PlanOp::Intersect { .. });
                let mut acc = vec![intersect; n];
                for set in operands {
                    for (a, m) in acc.iter_mut().zip(set) {
                        *a = if intersect { *a && m } else { *a || m };
                    }
                }
                stack.push(acc);
            }
        }
    }
    match (stack.pop(), stack.is_empty()) {
        (Some(result), true) => Ok(to_sorted(&result)),
        _ => Err(Error::InvalidState("plan left an unbalanced stack".into())),
    }
}

/// Answers of any query shape: tree queries run bottom-up, others through
/// the homomorphism search projected onto the target (unions via DNF).
pub fn answers(q: &QueryGraph, graph: &KnowledgeGraph) -> Result<Vec<EntityId>> {
    match classify(q) {
        PatternClass::Path | PatternClass::Tree => execute_tree(q, graph),
        _ => {
            let target = q
                .find_target()
                .ok_or_else(|| Error::Validation("query has no target node".into()))?;
            let mut out = Vec::new();
            for branch in to_dnf(q) {
                out.extend(execute_bgq(&branch, graph)?.iter().map(|m| m[&target]));
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        }
    }
}

fn difference(a: &[EntityId], b: &[EntityId]) -> Vec<EntityId> {
    a.iter().filter(|x| b.binary_search(x).is_err()).copied().collect()
}

/// Labels answers of `q` on a smaller (observed) and larger (complete) layer.
pub fn label_answers(
    q: &QueryGraph,
    small: &KnowledgeGraph,
    big: &KnowledgeGraph,
) -> Result<AnswerLabels> {
    if small.num_entities() != big.num_entities() || small.num_relations() != big.num_relations() {
        return Err(Error::InvalidInput("layers do not share a vocabulary".into()));
    }
    let on_small = answers(q, small)?;
    let on_big = answers(q, big)?;
    Ok(AnswerLabels {
        easy: on_small
            .iter()
            .filter(|x| on_big.binary_search(x).is_ok())
            .copied()
            .collect(),
        hard: difference(&on_big, &on_small),
        false_positive: difference(&on_small, &on_big),
    })
}

/// Ground-truth answer count of a tree query.
pub fn cardinality(q: &QueryGraph, graph: &KnowledgeGraph) -> Result<usize> {
    Ok(execute_tree(q, graph)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::Triple;
    use crate::query::{NodeKind, QueryAtom, UnionGroup};

    #[test]
    fn lone_negated_atom_is_complement() {
        let g = KnowledgeGraph::new(3, 1, vec![Triple::new(0, 0, 1)]).unwrap();
        let q = QueryGraph::new(
            vec![NodeKind::Anchor(Some(0)), NodeKind::Target],
            vec![QueryAtom::new(0, 0, 1).negated()],
            vec![],
        );
        assert_eq!(execute_tree(&q, &g).unwrap(), vec![0, 2]);
    }

    #[test]
    fn ungrounded_anchor_rejected() {
        let g = KnowledgeGraph::new(2, 1, vec![Triple::new(0, 0, 1)]).unwrap();
        let mut q = crate::query::template("1p").unwrap();
        q.atoms[0].relation = Some(0);
        assert!(matches!(execute_tree(&q, &g), Err(Error::Validation(_))));
    }

    #[test]
    fn identical_layers_have_no_hard_answers() {
        let g = KnowledgeGraph::new(3, 1, vec![Triple::new(0, 0, 1), Triple::new(0, 0, 2)]).unwrap();
        let q = QueryGraph::new(
            vec![NodeKind::Anchor(Some(0)), NodeKind::Target],
            vec![QueryAtom::new(0, 0, 1)],
            vec![],
        );
        let labels = label_answers(&q, &g, &g).unwrap();
        assert_eq!(labels.easy, vec![1, 2]);
        assert!(labels.hard.is_empty() && labels.false_positive.is_empty());
        assert_eq!(cardinality(&q, &g).unwrap(), 2);
    }

    /// 2in over a 5-entity graph where a test edge invalidates a training answer.
    #[test]
    fn negation_produces_false_positives() {
        // r: 0 -> {2, 3, 4}; s: 1 -> {3} in train, test adds s: 1 -> 4
        let train = vec![
            Triple::new(0, 0, 2),
            Triple::new(0, 0, 3),
            Triple::new(0, 0, 4),
            Triple::new(1, 1, 3),
        ];
        let mut test = train.clone();
        test.push(Triple::new(1, 1, 4));
        let small = KnowledgeGraph::new(5, 2, train).unwrap();
        let big = KnowledgeGraph::new(5, 2, test).unwrap();
        let q = QueryGraph::new(
            vec![NodeKind::Anchor(Some(0)), NodeKind::Anchor(Some(1)), NodeKind::Target],
            vec![QueryAtom::new(0, 0, 2), QueryAtom::new(1, 1, 2).negated()],
            vec![],
        );
        // direct set algebra: small = {2,3,4} \ {3} = {2,4}; big = {2,3,4} \ {3,4} = {2}
        let labels = label_answers(&q, &small, &big).unwrap();
        assert_eq!(labels.easy, vec![2]);
        assert!(labels.hard.is_empty());
        assert_eq!(labels.false_positive, vec![4]);
    }

    #[test]
    fn unsatisfiable_query_has_zero_cardinality() {
        let g = KnowledgeGraph::new(3, 2, vec![Triple::new(0, 0, 1)]).unwrap();
        let q = QueryGraph::new(
            vec![NodeKind::Anchor(Some(0)), NodeKind::Target],
            vec![QueryAtom::new(0, 1, 1)],
            vec![],
        );
        assert_eq!(cardinality(&q, &g).unwrap(), 0);
    }

    #[test]
    fn two_u_over_disjoint_branches_is_union_of_one_hops() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let triples = (0..120)
            .map(|_| Triple::new(rng.gen_range(0..30), rng.gen_range(0..3), rng.gen_range(0..30)))
            .collect();
        let g = KnowledgeGraph::new(30, 3, triples).unwrap();
        for _ in 0..50 {
            let (a1, a2) = (rng.gen_range(0..30), rng.gen_range(0..30));
            let (r1, r2) = (rng.gen_range(0..3), rng.gen_range(0..3));
            let q = QueryGraph::new(
                vec![NodeKind::Anchor(Some(a1)), NodeKind::Anchor(Some(a2)), NodeKind::Target],
                vec![QueryAtom::new(0, r1, 2), QueryAtom::new(1, r2, 2)],
                vec![UnionGroup::new(vec![vec![0], vec![1]])],
            );
            let mut expected: Vec<u32> = g
                .triples()
                .iter()
                .filter(|t| (t.head == a1 && t.relation == r1) || (t.head == a2 && t.relation == r2))
                .map(|t| t.tail)
                .collect();
            expected.sort_unstable();
            expected.dedup();
            assert_eq!(execute_tree(&q, &g).unwrap(), expected);
        }
    }
}
