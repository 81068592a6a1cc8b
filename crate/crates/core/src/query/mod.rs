//! Query computation graphs: nodes, relation atoms, and explicit union groups.

mod jsonl;
mod pattern;
mod plan;
mod rewrite;

use serde::{Deserialize, Serialize};

pub use jsonl::{
    parse_instance, parse_jsonl, read_jsonl, serialize_instance, write_jsonl, QueryInstance,
};
pub use pattern::{template, Pattern};
pub use plan::{classify, plan, PatternClass, Plan, PlanOp};
pub use rewrite::{demorgan_union, to_dnf};
pub(crate) use rewrite::restrict;

use crate::error::{Error, Result};
use crate::kg::{EntityId, RelationId};

/// Index of a node within [`QueryGraph::nodes`].
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    /// Constant; `None` until grounded.
    Anchor(Option<EntityId>),
    Variable,
    /// The single projected variable.
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryAtom {
    pub head: NodeId,
    /// `None` in ungrounded skeletons.
    pub relation: Option<RelationId>,
    pub tail: NodeId,
    pub negated: bool,
}

impl QueryAtom {
    pub fn new(head: NodeId, relation: RelationId, tail: NodeId) -> Self {
        QueryAtom {
            head,
            relation: Some(relation),
            tail,
            negated: false,
        }
    }

    pub fn negated(mut self) -> Self {
        self.negated = true;
        self
    }
}

/// How a union group is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum UnionMode {
    /// `A ∨ B` through the t-conorm.
    #[default]
    Direct,
    /// `¬(¬A ∧ ¬B)`.
    DeMorgan,
}

/// Alternatives joined by ∨; each branch is a set of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnionGroup {
    pub branches: Vec<Vec<usize>>,
    pub mode: UnionMode,
}

impl UnionGroup {
    pub fn new(branches: Vec<Vec<usize>>) -> Self {
        UnionGroup {
            branches,
            mode: UnionMode::Direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct QueryGraph {
    pub nodes: Vec<NodeKind>,
    pub atoms: Vec<QueryAtom>,
    pub unions: Vec<UnionGroup>,
}

impl QueryGraph {
    pub fn new(nodes: Vec<NodeKind>, atoms: Vec<QueryAtom>, unions: Vec<UnionGroup>) -> Self {
        QueryGraph {
            nodes,
            atoms,
            unions,
        }
    }

    /// The target node. Panics on queries that failed [`QueryGraph::validate`].
    pub fn target(&self) -> NodeId {
        self.find_target().expect("query has no target node")
    }

    pub fn find_target(&self) -> Option<NodeId> {
        self.nodes.iter().position(|k| *k == NodeKind::Target)
    }

    pub fn has_negation(&self) -> bool {
        self.atoms.iter().any(|a| a.negated)
    }

    pub fn anchor_entity(&self, node: NodeId) -> Result<EntityId> {
        match self.nodes.get(node) {
            Some(NodeKind::Anchor(Some(e))) => Ok(*e),
            Some(NodeKind::Anchor(None)) => {
                Err(Error::Validation(format!("anchor node {node} is not grounded")))
            }
            _ => Err(Error::Validation(format!("node {node} is not an anchor"))),
        }
    }

    pub fn atom_relation(&self, atom: usize) -> Result<RelationId> {
        self.atoms
            .get(atom)
            .and_then(|a| a.relation)
            .ok_or_else(|| Error::Validation(format!("atom {atom} has no grounded relation")))
    }

    /// Group membership of every atom: `(group, branch)`.
    pub fn union_membership(&self) -> Vec<Option<(usize, usize)>> {
        let mut out = vec![None; self.atoms.len()];
        for (g, group) in self.unions.iter().enumerate() {
            for (b, branch) in group.branches.iter().enumerate() {
                for &a in branch {
                    if a < out.len() {
                        out[a] = Some((g, b));
                    }
                }
            }
        }
        out
    }

    /// Structural checks shared by every engine; a target is optional so that
    /// Boolean (zero-variable) queries can be expressed.
    pub fn validate_structure(&self) -> Result<()> {
        let targets = self.nodes.iter().filter(|k| **k == NodeKind::Target).count();
        if targets > 1 {
            return Err(Error::Validation(format!("{targets} target nodes, expected one")));
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.head >= self.nodes.len() || atom.tail >= self.nodes.len() {
                return Err(Error::Validation(format!(
                    "atom {i} references missing node ({} -> {})",
                    atom.head, atom.tail
                )));
            }
            if atom.head == atom.tail {
                return Err(Error::Validation(format!("atom {i} is a self-loop on node {}", atom.head)));
            }
        }
        let mut owner = vec![false; self.atoms.len()];
        for (g, group) in self.unions.iter().enumerate() {
            if group.branches.is_empty() || group.branches.iter().any(|b| b.is_empty()) {
                return Err(Error::Validation(format!("union group {g} has an empty branch")));
            }
            for &a in group.branches.iter().flatten() {
                if a >= self.atoms.len() {
                    return Err(Error::Validation(format!("union group {g} references missing atom {a}")));
                }
                if std::mem::replace(&mut owner[a], true) {
                    return Err(Error::Validation(format!("atom {a} belongs to more than one union branch")));
                }
            }
        }
        Ok(())
    }

    /// Full well-formedness: structure plus exactly one target.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.find_target().is_none() {
            return Err(Error::Validation("query has no target node".into()));
        }
        Ok(())
    }

    /// Fails if any anchor or relation is still unbound.
    pub fn ensure_grounded(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if *node == NodeKind::Anchor(None) {
                return Err(Error::Validation(format!("anchor node {i} is not grounded")));
            }
        }
        for i in 0..self.atoms.len() {
            self.atom_relation(i)?;
        }
        Ok(())
    }

    /// Anchor entities in node order.
    pub fn anchors(&self) -> Vec<EntityId> {
        self.nodes
            .iter()
            .filter_map(|k| match k {
                NodeKind::Anchor(Some(e)) => Some(*e),
                _ => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_dangling_atoms_and_bad_groups() {
        let mut q = template("2u").unwrap();
        q.validate().unwrap();
        q.atoms[0].tail = 9;
        assert!(matches!(q.validate(), Err(Error::Validation(_))));

        let mut q = template("2u").unwrap();
        q.unions[0].branches.push(vec![0]);
        assert!(q.validate().is_err());

        let q = QueryGraph::new(vec![NodeKind::Variable], vec![], vec![]);
        assert!(q.validate().is_err());
        q.validate_structure().unwrap();
    }

    #[test]
    fn grounding_checks() {
        let q = template("1p").unwrap();
        assert!(q.ensure_grounded().is_err());
        assert!(q.anchor_entity(0).is_err());
        assert!(q.anchor_entity(1).is_err());
    }
}
