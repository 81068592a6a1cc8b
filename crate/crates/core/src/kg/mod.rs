//! Dictionary-encoded knowledge graphs, layered into train ⊆ valid ⊆ test splits.

mod dictionary;
mod graph;
mod store;

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

pub use dictionary::Dictionary;
pub use graph::{Direction, KnowledgeGraph, Triple};
pub use store::{load_stack, save_stack, write_stack, read_stack, STORE_MAGIC};

use crate::error::{Error, Result};

pub type EntityId = u32;
pub type RelationId = u32;

/// Which split of a [`GraphStack`] to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Train,
    Valid,
    Test,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Train, Layer::Valid, Layer::Test];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Train => "train",
            Layer::Valid => "valid",
            Layer::Test => "test",
        }
    }
}

impl std::fmt::Display for Layer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Layer::Train),
            "valid" => Ok(Layer::Valid),
            "test" => Ok(Layer::Test),
            other => Err(Error::UnknownName {
                kind: "layer",
                name: other.to_owned(),
                known: "train, valid, test".into(),
            }),
        }
    }
}

/// Three nested graphs over one shared vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStack {
    pub entities: Dictionary,
    pub relations: Dictionary,
    pub train: Arc<KnowledgeGraph>,
    pub valid: Arc<KnowledgeGraph>,
    pub test: Arc<KnowledgeGraph>,
}

impl GraphStack {
    /// Builds the stack from the triples each split adds on top of the previous one.
    pub fn from_splits(
        entities: Dictionary,
        relations: Dictionary,
        train: Vec<Triple>,
        valid_extra: Vec<Triple>,
        test_extra: Vec<Triple>,
    ) -> Result<Self> {
        let (ne, nr) = (entities.len(), relations.len());
        let mut valid = train.clone();
        valid.extend(valid_extra);
        let mut test = valid.clone();
        test.extend(test_extra);
        Ok(GraphStack {
            train: Arc::new(KnowledgeGraph::new(ne, nr, train)?),
            valid: Arc::new(KnowledgeGraph::new(ne, nr, valid)?),
            test: Arc::new(KnowledgeGraph::new(ne, nr, test)?),
            entities,
            relations,
        })
    }

    pub fn layer(&self, layer: Layer) -> &Arc<KnowledgeGraph> {
        match layer {
            Layer::Train => &self.train,
            Layer::Valid => &self.valid,
            Layer::Test => &self.test,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    /// Checks nesting and shared vocabulary.
    pub fn validate(&self) -> Result<()> {
        for g in [&self.train, &self.valid, &self.test] {
            if g.num_entities() != self.entities.len() || g.num_relations() != self.relations.len() {
                return Err(Error::Validation("layer vocabulary sizes differ".into()));
            }
        }
        if !self.train.is_subgraph_of(&self.valid) || !self.valid.is_subgraph_of(&self.test) {
            return Err(Error::Validation("layers are not nested train ⊆ valid ⊆ test".into()));
        }
        Ok(())
    }

    pub fn entity_name(&self, id: EntityId) -> Result<&str> {
        self.entities.decode(id)
    }

    pub fn relation_name(&self, id: RelationId) -> Result<&str> {
        self.relations.decode(id)
    }

    pub fn entity_id(&self, name: &str) -> Result<EntityId> {
        self.entities
            .encode(name)
            .ok_or_else(|| Error::Validation(format!("unknown entity `{name}`")))
    }

    pub fn relation_id(&self, name: &str) -> Result<RelationId> {
        self.relations
            .encode(name)
            .ok_or_else(|| Error::Validation(format!("unknown relation `{name}`")))
    }
}

/// Result of [`ingest_triples`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub stack: GraphStack,
    /// Lines that repeated a triple already seen in this or an earlier file.
    pub duplicates: usize,
}

/// Reads `head<TAB>relation<TAB>tail` files into a layered stack.
///
/// Ids are assigned in first-occurrence order across train, valid, then test.
/// Missing valid/test files yield layers identical to the previous one.
pub fn ingest_triples(
    train: &Path,
    valid: Option<&Path>,
    test: Option<&Path>,
) -> Result<Ingested> {
    let mut entities = Dictionary::new();
    let mut relations = Dictionary::new();
    let mut seen = HashSet::new();
    let mut duplicates = 0;
    let mut splits: Vec<Vec<Triple>> = Vec::with_capacity(3);
    for path in [Some(train), valid, test] {
        let mut added = Vec::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(crate::error::io_at(path))?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.strip_suffix('\r').unwrap_or(line);
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                    return Err(Error::Parse {
                        path: path.to_owned(),
                        line: idx + 1,
                        message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                    });
                }
                let triple = Triple::new(
                    entities.get_or_insert(fields[0]),
                    relations.get_or_insert(fields[1]),
                    entities.get_or_insert(fields[2]),
                );
                if seen.insert(triple) {
                    added.push(triple);
                } else {
                    duplicates += 1;
                }
            }
        }
        splits.push(added);
    }
    if splits[0].is_empty() {
        return Err(Error::InvalidInput(format!(
            "training file {} contains no triples",
            train.display()
        )));
    }
    if duplicates > 0 {
        log::warn!("merged {duplicates} duplicate triple line(s)");
    }
    let test_extra = splits.pop().unwrap_or_default();
    let valid_extra = splits.pop().unwrap_or_default();
    let train_triples = splits.pop().unwrap_or_default();
    let stack = GraphStack::from_splits(entities, relations, train_triples, valid_extra, test_extra)?;
    Ok(Ingested { stack, duplicates })
}
