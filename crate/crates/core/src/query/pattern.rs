use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{NodeKind, QueryAtom, QueryGraph, UnionGroup};

/// The fourteen standard benchmark query shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    P1,
    P2,
    P3,
    I2,
    I3,
    Ip,
    Pi,
    U2,
    Up,
    In2,
    In3,
    Inp,
    Pni,
    Pin,
}

impl Pattern {
    pub const ALL: [Pattern; 14] = [
        Pattern::P1,
        Pattern::P2,
        Pattern::P3,
        Pattern::I2,
        Pattern::I3,
        Pattern::Ip,
        Pattern::Pi,
        Pattern::U2,
        Pattern::Up,
        Pattern::In2,
        Pattern::In3,
        Pattern::Inp,
        Pattern::Pni,
        Pattern::Pin,
    ];

    /// Patterns used for training; ip, pi, 2u and up are held out.
    pub const TRAINING: [Pattern; 10] = [
        Pattern::P1,
        Pattern::P2,
        Pattern::P3,
        Pattern::I2,
        Pattern::I3,
        Pattern::In2,
        Pattern::In3,
        Pattern::Inp,
        Pattern::Pni,
        Pattern::Pin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::P1 => "1p",
            Pattern::P2 => "2p",
            Pattern::P3 => "3p",
            Pattern::I2 => "2i",
            Pattern::I3 => "3i",
            Pattern::Ip => "ip",
            Pattern::Pi => "pi",
            Pattern::U2 => "2u",
            Pattern::Up => "up",
            Pattern::In2 => "2in",
            Pattern::In3 => "3in",
            Pattern::Inp => "inp",
            Pattern::Pni => "pni",
            Pattern::Pin => "pin",
        }
    }

    pub fn index(self) -> usize {
        Pattern::ALL.iter().position(|&p| p == self).unwrap()
    }

    pub fn is_training(self) -> bool {
        Pattern::TRAINING.contains(&self)
    }

    pub fn has_negation(self) -> bool {
        matches!(
            self,
            Pattern::In2 | Pattern::In3 | Pattern::Inp | Pattern::Pni | Pattern::Pin
        )
    }

    pub fn has_union(self) -> bool {
        matches!(self, Pattern::U2 | Pattern::Up)
    }

    /// Ungrounded computation graph for this pattern.
    pub fn skeleton(self) -> QueryGraph {
        use NodeKind::{Anchor, Target, Variable};
        let a = Anchor(None);
        let atom = |head, tail| QueryAtom {
            head,
            relation: None,
            tail,
            negated: false,
        };
        let neg = |head, tail| QueryAtom {
            head,
            relation: None,
            tail,
            negated: true,
        };
        let (nodes, atoms, unions) = match self {
            Pattern::P1 => (vec![a, Target], vec![atom(0, 1)], vec![]),
            Pattern::P2 => (vec![a, Variable, Target], vec![atom(0, 1), atom(1, 2)], vec![]),
            Pattern::P3 => (
                vec![a, Variable, Variable, Target],
                vec![atom(0, 1), atom(1, 2), atom(2, 3)],
                vec![],
            ),
            Pattern::I2 => (vec![a, a, Target], vec![atom(0, 2), atom(1, 2)], vec![]),
            Pattern::I3 => (
                vec![a, a, a, Target],
                vec![atom(0, 3), atom(1, 3), atom(2, 3)],
                vec![],
            ),
            Pattern::Ip => (
                vec![a, a, Variable, Target],
                vec![atom(0, 2), atom(1, 2), atom(2, 3)],
                vec![],
            ),
            Pattern::Pi => (
                vec![a, Variable, a, Target],
                vec![atom(0, 1), atom(1, 3), atom(2, 3)],
                vec![],
            ),
            Pattern::U2 => (
                vec![a, a, Target],
                vec![atom(0, 2), atom(1, 2)],
                vec![UnionGroup::new(vec![vec![0], vec![1]])],
            ),
            Pattern::Up => (
                vec![a, a, Variable, Target],
                vec![atom(0, 2), atom(1, 2), atom(2, 3)],
                vec![UnionGroup::new(vec![vec![0], vec![1]])],
            ),
            Pattern::In2 => (vec![a, a, Target], vec![atom(0, 2), neg(1, 2)], vec![]),
            Pattern::In3 => (
                vec![a, a, a, Target],
                vec![atom(0, 3), atom(1, 3), neg(2, 3)],
                vec![],
            ),
            Pattern::Inp => (
                vec![a, a, Variable, Target],
                vec![atom(0, 2), neg(1, 2), atom(2, 3)],
                vec![],
            ),
            Pattern::Pin => (
                vec![a, Variable, a, Target],
                vec![atom(0, 1), atom(1, 3), neg(2, 3)],
                vec![],
            ),
            Pattern::Pni => (
                vec![a, Variable, a, Target],
                vec![atom(0, 1), neg(1, 3), atom(2, 3)],
                vec![],
            ),
        };
        QueryGraph::new(nodes, atoms, unions)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnsupportedPattern(format!("unknown pattern `{s}`")))
    }
}

/// Skeleton for a pattern name.
pub fn template(name: &str) -> Result<QueryGraph> {
    Ok(name.parse::<Pattern>()?.skeleton())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_hop_chain() {
        let q = template("3p").unwrap();
        assert_eq!(q.atoms.len(), 3);
        let anchors = q.nodes.iter().filter(|k| matches!(k, NodeKind::Anchor(_))).count();
        let vars = q.nodes.iter().filter(|k| **k == NodeKind::Variable).count();
        assert_eq!((anchors, vars), (1, 2));
        assert_eq!(q.atoms[2].tail, q.target());
    }

    #[test]
    fn two_in_has_one_negated_atom_into_target() {
        let q = template("2in").unwrap();
        assert_eq!(q.atoms.len(), 2);
        assert!(q.atoms.iter().all(|a| a.tail == q.target()));
        assert_eq!(q.atoms.iter().filter(|a| a.negated).count(), 1);
    }

    #[test]
    fn one_p_is_single_positive_atom() {
        let q = template("1p").unwrap();
        assert_eq!(q.atoms.len(), 1);
        assert!(!q.atoms[0].negated);
        assert!(matches!(q.nodes[q.atoms[0].head], NodeKind::Anchor(None)));
        assert_eq!(q.atoms[0].tail, q.target());
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(template("4p"), Err(Error::UnsupportedPattern(_))));
    }

    #[test]
    fn all_skeletons_valid_and_named() {
        for p in Pattern::ALL {
            p.skeleton().validate().unwrap();
            assert_eq!(p.name().parse::<Pattern>().unwrap(), p);
            assert_eq!(p.skeleton().has_negation(), p.has_negation());
        }
        assert_eq!(Pattern::TRAINING.len(), 10);
        assert!(!Pattern::Ip.is_training() && !Pattern::Up.is_training());
    }
}
