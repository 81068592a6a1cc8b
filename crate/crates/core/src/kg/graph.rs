use crate::error::{check_bounds, Error, Result};
use crate::fuzzy::FuzzySet;

use super::{EntityId, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Tails reachable from a head.
    Forward,
    /// Heads pointing into a tail.
    Backward,
}

/// Compressed adjacency keyed by `(relation, node)`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<u32>,
    targets: Vec<EntityId>,
}

impl Csr {
    fn build(
        num_entities: usize,
        num_relations: usize,
        triples: &[Triple],
        key: impl Fn(&Triple) -> (RelationId, EntityId, EntityId),
    ) -> Self {
        let slots = num_entities * num_relations;
        let mut counts = vec![0u32; slots + 1];
        for t in triples {
            let (r, src, _) = key(t);
            counts[r as usize * num_entities + src as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut targets = vec![0; triples.len()];
        for t in triples {
            let (r, src, dst) = key(t);
            let slot = r as usize * num_entities + src as usize;
            targets[cursor[slot] as usize] = dst;
            cursor[slot] += 1;
        }
        for slot in 0..slots {
            let (lo, hi) = (offsets[slot] as usize, offsets[slot + 1] as usize);
            targets[lo..hi].sort_unstable();
        }
        Csr { offsets, targets }
    }

    fn row(&self, num_entities: usize, relation: RelationId, node: EntityId) -> &[EntityId] {
        let slot = relation as usize * num_entities + node as usize;
        &self.targets[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }
}

/// Dictionary-encoded triple set with forward and backward indexes per relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    num_entities: usize,
    num_relations: usize,
    triples: Vec<Triple>,
    fwd: Csr,
    bwd: Csr,
}

impl KnowledgeGraph {
    /// Builds a graph; triples are sorted and deduplicated.
    pub fn new(num_entities: usize, num_relations: usize, mut triples: Vec<Triple>) -> Result<Self> {
        for t in &triples {
            check_bounds("entity", t.head as usize, num_entities)?;
            check_bounds("entity", t.tail as usize, num_entities)?;
            check_bounds("relation", t.relation as usize, num_relations)?;
        }
        triples.sort_unstable();
        triples.dedup();
        if num_entities.checked_mul(num_relations).is_none_or(|s| s >= u32::MAX as usize) {
            return Err(Error::InvalidInput("graph too large for u32 adjacency offsets".into()));
        }
        let fwd = Csr::build(num_entities, num_relations, &triples, |t| {
            (t.relation, t.head, t.tail)
        });
        let bwd = Csr::build(num_entities, num_relations, &triples, |t| {
            (t.relation, t.tail, t.head)
        });
        Ok(KnowledgeGraph {
            num_entities,
            num_relations,
            triples,
            fwd,
            bwd,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    /// Sorted, deduplicated triples.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        triple.relation < self.num_relations as u32
            && triple.head < self.num_entities as u32
            && self
                .fwd
                .row(self.num_entities, triple.relation, triple.head)
                .binary_search(&triple.tail)
                .is_ok()
    }

    pub fn neighbors(
        &self,
        relation: RelationId,
        node: EntityId,
        direction: Direction,
    ) -> Result<&[EntityId]> {
        check_bounds("relation", relation as usize, self.num_relations)?;
        check_bounds("entity", node as usize, self.num_entities)?;
        Ok(self.neighbors_unchecked(relation, node, direction))
    }

    pub(crate) fn neighbors_unchecked(
        &self,
        relation: RelationId,
        node: EntityId,
        direction: Direction,
    ) -> &[EntityId] {
        match direction {
            Direction::Forward => self.fwd.row(self.num_entities, relation, node),
            Direction::Backward => self.bwd.row(self.num_entities, relation, node),
        }
    }

    /// Indicator over tails of `(head, relation, *)`.
    pub fn boolean_row(&self, relation: RelationId, head: EntityId) -> Result<FuzzySet> {
        let tails = self.neighbors(relation, head, Direction::Forward)?;
        Ok(FuzzySet::indicator(self.num_entities, tails.iter().copied()))
    }

    /// Relations with at least one edge into `tail`.
    pub fn incoming_relations(&self, tail: EntityId) -> Vec<RelationId> {
        (0..self.num_relations as RelationId)
            .filter(|&r| !self.neighbors_unchecked(r, tail, Direction::Backward).is_empty())
            .collect()
    }

    pub fn is_subgraph_of(&self, other: &KnowledgeGraph) -> bool {
        self.triples.iter().all(|t| other.contains(t))
    }
}
