use std::collections::BTreeMap;

use crate::error::{check_bounds, Error, Result};
use crate::kg::{Direction, EntityId, KnowledgeGraph, Triple};
use crate::query::{NodeId, NodeKind, QueryGraph};

/// Assignment of variable (and target) nodes to entities.
pub type Mapping = BTreeMap<NodeId, EntityId>;

#[derive(Clone, Copy)]
enum Term {
    Const(EntityId),
    Var(usize),
}

/// All homomorphisms of a conjunctive query into `graph`: positive atoms must
/// map onto edges, negated atoms must not. Distinct variables may share an
/// entity. Variables are bound in a fixed order: smallest anchor-derived
/// candidate set first, then nodes adjacent to already-ordered ones, ties by
/// node id.
pub fn execute_bgq(q: &QueryGraph, graph: &KnowledgeGraph) -> Result<Vec<Mapping>> {
    q.validate_structure()?;
    if !q.unions.is_empty() {
        return Err(Error::Validation(
            "homomorphism search takes conjunctive queries; rewrite unions with to_dnf first".into(),
        ));
    }
    let n = graph.num_entities();
    let vars: Vec<NodeId> = (0..q.nodes.len())
        .filter(|&v| !matches!(q.nodes[v], NodeKind::Anchor(_)))
        .collect();
    let slot_of = |v: NodeId| vars.iter().position(|&x| x == v);
    let term = |v: NodeId| -> Result<Term> {
        match q.nodes[v] {
            NodeKind::Anchor(_) => {
                let e = q.anchor_entity(v)?;
                check_bounds("entity", e as usize, n)?;
                Ok(Term::Const(e))
            }
            _ => Ok(Term::Var(slot_of(v).expect("variable slot"))),
        }
    };
    let mut atoms = Vec::with_capacity(q.atoms.len());
    for i in 0..q.atoms.len() {
        let r = q.atom_relation(i)?;
        check_bounds("relation", r as usize, graph.num_relations())?;
        let a = &q.atoms[i];
        atoms.push((term(a.head)?, r, term(a.tail)?, a.negated));
    }

    // Ground atoms between constants decide the query outright.
    for &(h, r, t, neg) in &atoms {
        if let (Term::Const(h), Term::Const(t)) = (h, t) {
            if graph.contains(&Triple::new(h, r, t)) == neg {
                return Ok(Vec::new());
            }
        }
    }

    // Initial candidates from positive atoms touching a constant.
    let mut domains: Vec<Option<Vec<EntityId>>> = vec![None; vars.len()];
    for &(h, r, t, neg) in &atoms {
        if neg {
            continue;
        }
        let (slot, cands) = match (h, t) {
            (Term::Const(c), Term::Var(s)) => (s, graph.neighbors_unchecked(r, c, Direction::Forward)),
            (Term::Var(s), Term::Const(c)) => (s, graph.neighbors_unchecked(r, c, Direction::Backward)),
            _ => continue,
        };
        domains[slot] = Some(match domains[slot].take() {
            None => cands.to_vec(),
            Some(prev) => prev.into_iter().filter(|e| cands.binary_search(e).is_ok()).collect(),
        });
    }
    let size = |s: usize| domains[s].as_ref().map_or(n, Vec::len);

    let adjacent = |a: usize, b: usize| {
        atoms.iter().any(|&(h, _, t, neg)| {
            !neg && matches!((h, t), (Term::Var(x), Term::Var(y)) if (x == a && y == b) || (x == b && y == a))
        })
    };
    let mut order: Vec<usize> = Vec::with_capacity(vars.len());
    while order.len() < vars.len() {
        let next = (0..vars.len())
            .filter(|s| !order.contains(s))
            .min_by_key(|&s| {
                let connected = order.iter().any(|&o| adjacent(o, s));
                (!connected && !order.is_empty(), size(s), vars[s])
            })
            .expect("unordered variable remains");
        order.push(next);
    }

    let mut search = Search {
        graph,
        atoms: &atoms,
        domains: &domains,
        order: &order,
        assignment: vec![None; vars.len()],
        results: Vec::new(),
        n,
    };
    search.extend(0);
    let mut results: Vec<Mapping> = search
        .results
        .into_iter()
        .map(|values| vars.iter().copied().zip(values).collect())
        .collect();
    results.sort();
    Ok(results)
}

struct Search<'a> {
    graph: &'a KnowledgeGraph,
    atoms: &'a [(Term, u32, Term, bool)],
    domains: &'a [Option<Vec<EntityId>>],
    order: &'a [usize],
    assignment: Vec<Option<EntityId>>,
    results: Vec<Vec<EntityId>>,
    n: usize,
}

impl Search<'_> {
    fn value(&self, t: Term) -> Option<EntityId> {
        match t {
            Term::Const(c) => Some(c),
            Term::Var(s) => self.assignment[s],
        }
    }

    /// Candidates for `slot`, narrowed by a positive atom to an assigned neighbour.
    fn candidates(&self, slot: usize) -> Vec<EntityId> {
        for &(h, r, t, neg) in self.atoms {
            if neg {
                continue;
            }
            let narrowed = match (h, t) {
                (Term::Var(s), Term::Var(o)) if s == slot && self.assignment[o].is_some() => self
                    .graph
                    .neighbors_unchecked(r, self.assignment[o].unwrap(), Direction::Backward),
                (Term::Var(o), Term::Var(s)) if s == slot && self.assignment[o].is_some() => self
                    .graph
                    .neighbors_unchecked(r, self.assignment[o].unwrap(), Direction::Forward),
                _ => continue,
            };
            return match &self.domains[slot] {
                Some(d) => narrowed.iter().filter(|e| d.binary_search(e).is_ok()).copied().collect(),
                None => narrowed.to_vec(),
            };
        }
        match &self.domains[slot] {
            Some(d) => d.clone(),
            None => (0..self.n as EntityId).collect(),
        }
    }

    fn consistent(&self) -> bool {
        self.atoms.iter().all(|&(h, r, t, neg)| match (self.value(h), self.value(t)) {
            (Some(h), Some(t)) => self.graph.contains(&Triple::new(h, r, t)) != neg,
            _ => true,
        })
    }

    fn extend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.results
                .push(self.assignment.iter().map(|v| v.expect("complete assignment")).collect());
            return;
        }
        let slot = self.order[depth];
        for e in self.candidates(slot) {
            self.assignment[slot] = Some(e);
            if self.consistent() {
                self.extend(depth + 1);
            }
        }
        self.assignment[slot] = None;
    }
}
