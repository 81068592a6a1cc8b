use super::{NodeKind, QueryGraph, UnionMode};

/// Distributes ∧ over ∨: one conjunctive query per choice of branch in every
/// union group. Atoms and nodes used only by unchosen branches are dropped.
pub fn to_dnf(q: &QueryGraph) -> Vec<QueryGraph> {
    if q.unions.is_empty() {
        return vec![q.clone()];
    }
    let grouped: Vec<bool> = {
        let membership = q.union_membership();
        membership.iter().map(Option::is_some).collect()
    };
    let mut choices: Vec<Vec<usize>> = vec![Vec::new()];
    for group in &q.unions {
        choices = choices
            .into_iter()
            .flat_map(|prefix| {
                (0..group.branches.len()).map(move |b| {
                    let mut next = prefix.clone();
                    next.push(b);
                    next
                })
            })
            .collect();
    }
    choices
        .into_iter()
        .map(|choice| {
            let mut keep: Vec<bool> = grouped.iter().map(|g| !g).collect();
            for (g, &b) in choice.iter().enumerate() {
                for &a in &q.unions[g].branches[b] {
                    keep[a] = true;
                }
            }
            restrict(q, &keep)
        })
        .collect()
}

/// Keeps the selected atoms and the nodes they touch (plus the target).
pub(crate) fn restrict(q: &QueryGraph, keep_atom: &[bool]) -> QueryGraph {
    let mut used = vec![false; q.nodes.len()];
    for (a, atom) in q.atoms.iter().enumerate() {
        if keep_atom[a] {
            used[atom.head] = true;
            used[atom.tail] = true;
        }
    }
    for (v, kind) in q.nodes.iter().enumerate() {
        if *kind == NodeKind::Target {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; q.nodes.len()];
    let mut nodes = Vec::new();
    for (v, kind) in q.nodes.iter().enumerate() {
        if used[v] {
            remap[v] = nodes.len();
            nodes.push(*kind);
        }
    }
    let atoms = q
        .atoms
        .iter()
        .zip(keep_atom)
        .filter(|(_, &k)| k)
        .map(|(atom, _)| {
            let mut atom = *atom;
            atom.head = remap[atom.head];
            atom.tail = remap[atom.tail];
            atom
        })
        .collect();
    QueryGraph::new(nodes, atoms, Vec::new())
}

/// Marks every union group for evaluation as `¬(¬A ∧ ¬B ∧ …)`.
pub fn demorgan_union(q: &QueryGraph) -> QueryGraph {
    let mut out = q.clone();
    for group in &mut out.unions {
        group.mode = UnionMode::DeMorgan;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{classify, plan, template, PatternClass, PlanOp, QueryAtom, UnionGroup};

    #[test]
    fn no_union_is_identity() {
        let q = template("3i").unwrap();
        assert_eq!(to_dnf(&q), vec![q.clone()]);
        assert_eq!(demorgan_union(&q), q);
    }

    #[test]
    fn up_splits_into_two_chains() {
        let branches = to_dnf(&template("up").unwrap());
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!(b.unions.is_empty());
            assert_eq!(b.atoms.len(), 2);
            assert_eq!(classify(b), PatternClass::Path);
        }
    }

    #[test]
    fn product_of_two_groups() {
        // (A ∨ B) ∧ (C ∨ D) over four anchors into the target
        let nodes = vec![
            NodeKind::Anchor(Some(0)),
            NodeKind::Anchor(Some(1)),
            NodeKind::Anchor(Some(2)),
            NodeKind::Anchor(Some(3)),
            NodeKind::Target,
        ];
        let atoms = (0..4).map(|i| QueryAtom::new(i, i as u32, 4)).collect();
        let q = QueryGraph::new(
            nodes,
            atoms,
            vec![
                UnionGroup::new(vec![vec![0], vec![1]]),
                UnionGroup::new(vec![vec![2], vec![3]]),
            ],
        );
        let dnf = to_dnf(&q);
        assert_eq!(dnf.len(), 4);
        let rels: Vec<Vec<u32>> = dnf
            .iter()
            .map(|b| b.atoms.iter().map(|a| a.relation.unwrap()).collect())
            .collect();
        assert_eq!(rels, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]);
        for b in &dnf {
            b.validate().unwrap();
            assert!(b.unions.is_empty());
        }
    }

    #[test]
    fn demorgan_plan_negates_branches_and_result() {
        use PlanOp::*;
        let q = demorgan_union(&template("2u").unwrap());
        assert_eq!(
            plan(&q).unwrap().ops,
            vec![
                Anchor { node: 0 },
                Project { atom: 0 },
                Negate,
                Anchor { node: 1 },
                Project { atom: 1 },
                Negate,
                Intersect { arity: 2 },
                Negate
            ]
        );
    }
}
