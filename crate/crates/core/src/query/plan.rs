use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

use super::{NodeId, NodeKind, QueryGraph, UnionMode};

/// Structural class of a query graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternClass {
    /// A single directed chain from one anchor to the target.
    Path,
    /// Every non-target variable feeds exactly one atom; the atoms form a tree rooted at the target.
    Tree,
    /// Acyclic but not tree-shaped (a variable fans out, or a variable is not reached from an anchor).
    Dag,
    /// Contains a directed cycle.
    Cyclic,
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternClass::Path => "path",
            PatternClass::Tree => "tree",
            PatternClass::Dag => "dag",
            PatternClass::Cyclic => "cyclic",
        })
    }
}

fn has_directed_cycle(q: &QueryGraph) -> bool {
    let n = q.nodes.len();
    let mut indeg = vec![0usize; n];
    for a in &q.atoms {
        indeg[a.tail] += 1;
    }
    let mut stack: Vec<NodeId> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for a in q.atoms.iter().filter(|a| a.head == v) {
            indeg[a.tail] -= 1;
            if indeg[a.tail] == 0 {
                stack.push(a.tail);
            }
        }
    }
    seen < n
}

/// Classifies a structurally valid query.
pub fn classify(q: &QueryGraph) -> PatternClass {
    if has_directed_cycle(q) {
        return PatternClass::Cyclic;
    }
    let n = q.nodes.len();
    let (mut indeg, mut outdeg) = (vec![0usize; n], vec![0usize; n]);
    for a in &q.atoms {
        indeg[a.tail] += 1;
        outdeg[a.head] += 1;
    }
    let tree = q.find_target().is_some()
        && q.nodes.iter().enumerate().all(|(v, kind)| match kind {
            NodeKind::Anchor(_) => indeg[v] == 0,
            NodeKind::Variable => indeg[v] >= 1 && outdeg[v] == 1,
            NodeKind::Target => indeg[v] >= 1 && outdeg[v] == 0,
        });
    if !tree {
        return PatternClass::Dag;
    }
    let chain = q.unions.is_empty() && indeg.iter().all(|&d| d <= 1);
    if chain {
        PatternClass::Path
    } else {
        PatternClass::Tree
    }
}

/// One step of a post-order execution plan, evaluated on a stack of entity sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanOp {
    /// Push the singleton of an anchor node.
    Anchor { node: NodeId },
    /// Pop a set, push its image under the atom's relation.
    Project { atom: usize },
    /// Complement the top of the stack.
    Negate,
    /// Pop `arity` sets, push their intersection.
    Intersect { arity: usize },
    /// Pop `arity` sets, push their union.
    Union { arity: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub ops: Vec<PlanOp>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn has_negation(&self) -> bool {
        self.ops.contains(&PlanOp::Negate)
    }
}

struct Planner<'q> {
    q: &'q QueryGraph,
    membership: Vec<Option<(usize, usize)>>,
    /// Per group, per branch: the atoms leaving the branch (their tails are outside it).
    exits: Vec<Vec<Vec<usize>>>,
    /// Per group: the node all branches merge into.
    merge: Vec<NodeId>,
    ops: Vec<PlanOp>,
}

impl<'q> Planner<'q> {
    fn new(q: &'q QueryGraph) -> Result<Self> {
        let membership = q.union_membership();
        let mut exits = Vec::with_capacity(q.unions.len());
        let mut merge = Vec::with_capacity(q.unions.len());
        for (g, group) in q.unions.iter().enumerate() {
            let mut group_exits = Vec::with_capacity(group.branches.len());
            let mut merge_node = None;
            for branch in &group.branches {
                let mut branch_exits: Vec<usize> = branch
                    .iter()
                    .copied()
                    .filter(|&a| !branch.iter().any(|&b| q.atoms[b].head == q.atoms[a].tail))
                    .collect();
                branch_exits.sort_unstable();
                for &a in &branch_exits {
                    match merge_node {
                        None => merge_node = Some(q.atoms[a].tail),
                        Some(m) if m == q.atoms[a].tail => {}
                        Some(_) => {
                            return Err(Error::UnsupportedPattern(format!(
                                "union group {g} branches merge into different nodes"
                            )))
                        }
                    }
                    let upstream = subtree_atoms(q, a);
                    if upstream.iter().any(|u| !branch.contains(u)) {
                        return Err(Error::UnsupportedPattern(format!(
                            "union group {g}: branch does not contain its whole subquery"
                        )));
                    }
                }
                let covered: BTreeSet<usize> =
                    branch_exits.iter().flat_map(|&a| subtree_atoms(q, a)).collect();
                if covered.len() != branch.len() {
                    return Err(Error::UnsupportedPattern(format!(
                        "union group {g}: branch atoms are not connected to its exit"
                    )));
                }
                group_exits.push(branch_exits);
            }
            exits.push(group_exits);
            merge.push(merge_node.expect("validated groups are non-empty"));
        }
        Ok(Planner {
            q,
            membership,
            exits,
            merge,
            ops: Vec::new(),
        })
    }

    fn emit_node(&mut self, node: NodeId) -> Result<()> {
        let incoming: Vec<usize> = (0..self.q.atoms.len())
            .filter(|&a| self.q.atoms[a].tail == node)
            .collect();
        if incoming.is_empty() {
            return match self.q.nodes[node] {
                NodeKind::Anchor(_) => {
                    self.ops.push(PlanOp::Anchor { node });
                    Ok(())
                }
                _ => Err(Error::UnsupportedPattern(format!(
                    "variable node {node} is not reached from any anchor"
                ))),
            };
        }
        enum Unit {
            Atom(usize),
            Group(usize),
        }
        let mut units = Vec::new();
        let mut groups_done = BTreeSet::new();
        for &a in &incoming {
            match self.membership[a] {
                Some((g, _)) if self.merge[g] == node => {
                    if groups_done.insert(g) {
                        units.push(Unit::Group(g));
                    }
                }
                Some((g, _)) => {
                    return Err(Error::UnsupportedPattern(format!(
                        "atom {a} of union group {g} enters a node outside the merge point"
                    )))
                }
                None => units.push(Unit::Atom(a)),
            }
        }
        let arity = units.len();
        for unit in units {
            match unit {
                Unit::Atom(a) => self.emit_atom(a)?,
                Unit::Group(g) => self.emit_group(g)?,
            }
        }
        if arity > 1 {
            self.ops.push(PlanOp::Intersect { arity });
        }
        Ok(())
    }

    fn emit_atom(&mut self, atom: usize) -> Result<()> {
        self.emit_node(self.q.atoms[atom].head)?;
        self.ops.push(PlanOp::Project { atom });
        if self.q.atoms[atom].negated {
            self.ops.push(PlanOp::Negate);
        }
        Ok(())
    }

    fn emit_group(&mut self, g: usize) -> Result<()> {
        let mode = self.q.unions[g].mode;
        let branches = self.exits[g].clone();
        for branch in &branches {
            for &a in branch {
                self.emit_atom(a)?;
            }
            if branch.len() > 1 {
                self.ops.push(PlanOp::Intersect { arity: branch.len() });
            }
            if mode == UnionMode::DeMorgan {
                self.ops.push(PlanOp::Negate);
            }
        }
        let arity = branches.len();
        match mode {
            UnionMode::Direct => {
                if arity > 1 {
                    self.ops.push(PlanOp::Union { arity });
                }
            }
            UnionMode::DeMorgan => {
                if arity > 1 {
                    self.ops.push(PlanOp::Intersect { arity });
                }
                self.ops.push(PlanOp::Negate);
            }
        }
        Ok(())
    }
}

/// Atoms in the computation subtree ending with `atom` (inclusive).
fn subtree_atoms(q: &QueryGraph, atom: usize) -> Vec<usize> {
    let mut out = vec![atom];
    let mut frontier = vec![q.atoms[atom].head];
    while let Some(v) = frontier.pop() {
        for (i, a) in q.atoms.iter().enumerate() {
            if a.tail == v && !out.contains(&i) {
                out.push(i);
                frontier.push(a.head);
            }
        }
    }
    out
}

/// Post-order plan of a path or tree query; children come before parents and
/// siblings are ordered by ascending atom index.
pub fn plan(q: &QueryGraph) -> Result<Plan> {
    q.validate()?;
    match classify(q) {
        PatternClass::Path | PatternClass::Tree => {}
        class => {
            return Err(Error::UnsupportedPattern(format!(
                "{class} queries cannot be planned as a computation tree"
            )))
        }
    }
    let mut planner = Planner::new(q)?;
    planner.emit_node(q.target())?;
    Ok(Plan { ops: planner.ops })
}
