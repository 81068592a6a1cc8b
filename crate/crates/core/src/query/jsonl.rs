//! One JSON object per line:
//! `{"id", "pattern", "nodes": [{"id", "kind", "entity"?}], "atoms": [{"head", "rel", "tail", "neg"}],
//!   "unions": [[[atom indices]]], "easy": [..], "hard": [..]}`.
//! Entities and relations are referenced by surface string.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, GraphStack};

use super::{NodeKind, QueryAtom, QueryGraph, UnionGroup};

/// A grounded query with its labeled answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryInstance {
    pub id: String,
    pub pattern: String,
    pub query: QueryGraph,
    pub easy: Vec<EntityId>,
    pub hard: Vec<EntityId>,
}

impl QueryInstance {
    /// `easy ∪ hard`, sorted.
    pub fn answers(&self) -> Vec<EntityId> {
        let mut all: Vec<EntityId> = self.easy.iter().chain(&self.hard).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    id: String,
    pattern: String,
    nodes: Vec<NodeJson>,
    atoms: Vec<AtomJson>,
    #[serde(default)]
    unions: Vec<Vec<Vec<usize>>>,
    #[serde(default)]
    easy: Vec<String>,
    #[serde(default)]
    hard: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: i64,
    kind: KindJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entity: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindJson {
    Anchor,
    Var,
    Target,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    head: i64,
    rel: String,
    tail: i64,
    neg: bool,
}

/// Serializes one record. De Morgan-marked groups are written as plain unions.
pub fn serialize_instance(inst: &QueryInstance, stack: &GraphStack) -> Result<String> {
    let q = &inst.query;
    let nodes = q
        .nodes
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let (kind, entity) = match kind {
                NodeKind::Anchor(e) => (
                    KindJson::Anchor,
                    e.map(|e| stack.entity_name(e).map(str::to_owned)).transpose()?,
                ),
                NodeKind::Variable => (KindJson::Var, None),
                NodeKind::Target => (KindJson::Target, None),
            };
            Ok(NodeJson {
                id: i as i64,
                kind,
                entity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let atoms = q
        .atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            Ok(AtomJson {
                head: a.head as i64,
                rel: stack.relation_name(q.atom_relation(i)?)?.to_owned(),
                tail: a.tail as i64,
                neg: a.negated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let names = |ids: &[EntityId]| -> Result<Vec<String>> {
        ids.iter()
            .map(|&e| stack.entity_name(e).map(str::to_owned))
            .collect()
    };
    let record = RecordJson {
        id: inst.id.clone(),
        pattern: inst.pattern.clone(),
        nodes,
        atoms,
        unions: q.unions.iter().map(|g| g.branches.clone()).collect(),
        easy: names(&inst.easy)?,
        hard: names(&inst.hard)?,
    };
    Ok(serde_json::to_string(&record)?)
}

/// Parses and validates one record.
pub fn parse_instance(line: &str, stack: &GraphStack) -> Result<QueryInstance> {
    let de = &mut serde_json::Deserializer::from_str(line);
    let record: RecordJson = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let mut index = HashMap::with_capacity(record.nodes.len());
    let mut nodes = Vec::with_capacity(record.nodes.len());
    for (pos, node) in record.nodes.iter().enumerate() {
        if index.insert(node.id, pos).is_some() {
            return Err(Error::Validation(format!("duplicate node id {}", node.id)));
        }
        let kind = match (node.kind, &node.entity) {
            (KindJson::Anchor, Some(name)) => NodeKind::Anchor(Some(stack.entity_id(name)?)),
            (KindJson::Anchor, None) => NodeKind::Anchor(None),
            (KindJson::Var, None) => NodeKind::Variable,
            (KindJson::Target, None) => NodeKind::Target,
            (_, Some(_)) => {
                return Err(Error::Schema {
                    field: format!("nodes[{pos}].entity"),
                    message: "only anchor nodes carry an entity".into(),
                })
            }
        };
        nodes.push(kind);
    }
    let lookup = |id: i64, field: String| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Validation(format!("{field} references missing node id {id}")))
    };
    let atoms = record
        .atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            Ok(QueryAtom {
                head: lookup(a.head, format!("atoms[{i}].head"))?,
                relation: Some(stack.relation_id(&a.rel)?),
                tail: lookup(a.tail, format!("atoms[{i}].tail"))?,
                negated: a.neg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let unions = record.unions.into_iter().map(UnionGroup::new).collect();
    let query = QueryGraph::new(nodes, atoms, unions);
    query.validate()?;
    let ids = |names: &[String]| -> Result<Vec<EntityId>> {
        names.iter().map(|n| stack.entity_id(n)).collect()
    };
    Ok(QueryInstance {
        id: record.id,
        pattern: record.pattern,
        query,
        easy: ids(&record.easy)?,
        hard: ids(&record.hard)?,
    })
}

pub fn parse_jsonl(text: &str, stack: &GraphStack) -> Result<Vec<QueryInstance>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            parse_instance(line, stack).map_err(|e| match e {
                Error::Schema { field, message } => Error::Schema {
                    field: format!("line {}: {field}", n + 1),
                    message,
                },
                Error::Validation(m) => Error::Validation(format!("line {}: {m}", n + 1)),
                other => other,
            })
        })
        .collect()
}

pub fn read_jsonl(path: &Path, stack: &GraphStack) -> Result<Vec<QueryInstance>> {
    parse_jsonl(&fs::read_to_string(path).map_err(crate::error::io_at(path))?, stack)
}

pub fn write_jsonl(path: &Path, instances: &[QueryInstance], stack: &GraphStack) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for inst in instances {
        writeln!(out, "{}", serialize_instance(inst, stack)?)?;
    }
    out.flush()?;
    Ok(())
}
