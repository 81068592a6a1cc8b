use rand::seq::SliceRandom;

use crate::error::Result;
use crate::kg::{Direction, EntityId, KnowledgeGraph, RelationId};
use crate::query::{restrict, NodeId, NodeKind, Pattern, QueryGraph};
use crate::rng::Rng;
use crate::symbolic;

/// Reverse-walk grounding of one skeleton on one layer.
pub(crate) struct Grounder<'a> {
    graph: &'a KnowledgeGraph,
    /// Entities with at least one incoming edge.
    seeds: &'a [EntityId],
    share_union_anchors: bool,
}

impl<'a> Grounder<'a> {
    pub(crate) fn new(graph: &'a KnowledgeGraph, seeds: &'a [EntityId], share_union_anchors: bool) -> Self {
        Grounder { graph, seeds, share_union_anchors }
    }

    /// One grounding attempt; `None` when a walk dead-ends or a negation would be vacuous.
    pub(crate) fn attempt(&self, pattern: Pattern, rng: &mut Rng) -> Result<Option<QueryGraph>> {
        let mut q = pattern.skeleton();
        let Some(&answer) = self.seeds.choose(rng) else {
            return Ok(None);
        };
        let membership = q.union_membership();
        let target = q.target();
        let mut bound: Vec<Option<EntityId>> = vec![None; q.nodes.len()];
        if !self.walk_back(&mut q, &mut bound, &membership, target, answer, rng) {
            return Ok(None);
        }
        let negated: Vec<usize> = (0..q.atoms.len()).filter(|&a| q.atoms[a].negated).collect();
        for a in negated.iter().copied() {
            let node = q.atoms[a].tail;
            let Some(current) = bound[node] else {
                return Ok(None);
            };
            let mut pool = self.positive_candidates(&q, node)?;
            pool.retain(|&x| x != current && self.has_incoming(x));
            let Some(&excluded) = pool.choose(rng) else {
                return Ok(None);
            };
            let (r, h) = match self.incoming(excluded).choose(rng) {
                Some(&edge) => edge,
                None => return Ok(None),
            };
            q.atoms[a].relation = Some(r);
            if !self.bind_head(&mut q, &mut bound, &membership, a, h, rng) {
                return Ok(None);
            }
        }
        if !negated.is_empty() && !self.negation_matters(&q)? {
            return Ok(None);
        }
        Ok(Some(q))
    }

    fn incoming(&self, tail: EntityId) -> Vec<(RelationId, EntityId)> {
        let mut edges = Vec::new();
        for r in 0..self.graph.num_relations() as RelationId {
            for &h in self.graph.neighbors_unchecked(r, tail, Direction::Backward) {
                edges.push((r, h));
            }
        }
        edges
    }

    fn has_incoming(&self, tail: EntityId) -> bool {
        self.seeds.binary_search(&tail).is_ok()
    }

    /// Grounds every positive atom ending at `node`, walking edges backwards from `entity`.
    fn walk_back(
        &self,
        q: &mut QueryGraph,
        bound: &mut [Option<EntityId>],
        membership: &[Option<(usize, usize)>],
        node: NodeId,
        entity: EntityId,
        rng: &mut Rng,
    ) -> bool {
        bound[node] = Some(entity);
        let atoms: Vec<usize> = (0..q.atoms.len())
            .filter(|&a| q.atoms[a].tail == node && !q.atoms[a].negated)
            .collect();
        for a in atoms {
            let from = match membership[a] {
                Some((_, branch)) if branch > 0 && !self.share_union_anchors => {
                    *self.seeds.choose(rng).expect("seeds are non-empty")
                }
                _ => entity,
            };
            let edges = self.incoming(from);
            let Some(&(r, h)) = edges.choose(rng) else {
                return false;
            };
            q.atoms[a].relation = Some(r);
            if !self.bind_head(q, bound, membership, a, h, rng) {
                return false;
            }
        }
        true
    }

    fn bind_head(
        &self,
        q: &mut QueryGraph,
        bound: &mut [Option<EntityId>],
        membership: &[Option<(usize, usize)>],
        atom: usize,
        entity: EntityId,
        rng: &mut Rng,
    ) -> bool {
        let head = q.atoms[atom].head;
        match q.nodes[head] {
            NodeKind::Anchor(_) => {
                q.nodes[head] = NodeKind::Anchor(Some(entity));
                bound[head] = Some(entity);
                true
            }
            NodeKind::Variable => self.walk_back(q, bound, membership, head, entity, rng),
            NodeKind::Target => false,
        }
    }

    /// Entities satisfying the positive atoms that end at `node`.
    fn positive_candidates(&self, q: &QueryGraph, node: NodeId) -> Result<Vec<EntityId>> {
        if let NodeKind::Anchor(Some(e)) = q.nodes[node] {
            return Ok(vec![e]);
        }
        let mut acc: Option<Vec<EntityId>> = None;
        for atom in q.atoms.iter().filter(|a| a.tail == node && !a.negated) {
            let Some(r) = atom.relation else { continue };
            let mut reached: Vec<EntityId> = Vec::new();
            for h in self.positive_candidates(q, atom.head)? {
                reached.extend_from_slice(self.graph.neighbors_unchecked(r, h, Direction::Forward));
            }
            reached.sort_unstable();
            reached.dedup();
            acc = Some(match acc {
                None => reached,
                Some(prev) => prev.into_iter().filter(|x| reached.binary_search(x).is_ok()).collect(),
            });
        }
        Ok(acc.unwrap_or_default())
    }

    /// Dropping the negated branches must change the answer set.
    fn negation_matters(&self, q: &QueryGraph) -> Result<bool> {
        let keep = positive_atoms(q);
        let positive = restrict(q, &keep);
        Ok(symbolic::answers(&positive, self.graph)? != symbolic::answers(q, self.graph)?)
    }
}

/// Atoms whose route to the target crosses no negated atom.
fn positive_atoms(q: &QueryGraph) -> Vec<bool> {
    let out_atom = |node: NodeId| q.atoms.iter().position(|a| a.head == node);
    (0..q.atoms.len())
        .map(|start| {
            let mut cur = start;
            loop {
                if q.atoms[cur].negated {
                    return false;
                }
                let tail = q.atoms[cur].tail;
                if q.nodes[tail] == NodeKind::Target {
                    return true;
                }
                match out_atom(tail) {
                    Some(next) => cur = next,
                    None => return false,
                }
            }
        })
        .collect()
}

/// Entities with an incoming edge, ascending.
pub(crate) fn seed_entities(graph: &KnowledgeGraph) -> Vec<EntityId> {
    let mut seeds: Vec<EntityId> = graph.triples().iter().map(|t| t.tail).collect();
    seeds.sort_unstable();
    seeds.dedup();
    seeds
}

