//! Sources of `[0, 1]` truth values for one-hop atoms `relation(head, ·)`.

use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;

use crate::error::{check_bounds, Error, Result};
use crate::kg::{Direction, EntityId, KnowledgeGraph, RelationId};

/// A row of truth values over every tail entity, one row per `(relation, head)`.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    fn num_entities(&self) -> usize;

    fn num_relations(&self) -> usize;

    /// Values of `relation(head, t)` for every `t`, each in [0, 1].
    fn row(&self, relation: RelationId, head: EntityId) -> Result<Arc<[f64]>>;
}

/// Exact adjacency of a graph layer.
#[derive(Debug, Clone)]
pub struct BooleanScorer {
    graph: Arc<KnowledgeGraph>,
}

impl BooleanScorer {
    pub fn new(graph: Arc<KnowledgeGraph>) -> Self {
        BooleanScorer { graph }
    }
}

impl Scorer for BooleanScorer {
    fn name(&self) -> &str {
        "boolean"
    }

    fn num_entities(&self) -> usize {
        self.graph.num_entities()
    }

    fn num_relations(&self) -> usize {
        self.graph.num_relations()
    }

    fn row(&self, relation: RelationId, head: EntityId) -> Result<Arc<[f64]>> {
        let mut row = vec![0.0; self.graph.num_entities()];
        for &t in self.graph.neighbors(relation, head, Direction::Forward)? {
            row[t as usize] = 1.0;
        }
        Ok(row.into())
    }
}

/// Fully materialized `|R| × |E| × |E|` score tensor.
#[derive(Debug, Clone)]
pub struct DenseScorer {
    num_entities: usize,
    num_relations: usize,
    rows: Vec<Arc<[f64]>>,
}

impl DenseScorer {
    /// Evaluates `f(relation, head, tail)` for every triple; values are clamped to [0, 1].
    pub fn from_fn(
        num_entities: usize,
        num_relations: usize,
        mut f: impl FnMut(RelationId, EntityId, EntityId) -> f64,
    ) -> Self {
        let mut rows = Vec::with_capacity(num_entities * num_relations);
        for r in 0..num_relations as RelationId {
            for h in 0..num_entities as EntityId {
                let row: Vec<f64> = (0..num_entities as EntityId)
                    .map(|t| f(r, h, t).clamp(0.0, 1.0))
                    .collect();
                rows.push(row.into());
            }
        }
        DenseScorer {
            num_entities,
            num_relations,
            rows,
        }
    }

    /// Materializes every row of another scorer.
    pub fn materialize(inner: &dyn Scorer) -> Result<Self> {
        let (ne, nr) = (inner.num_entities(), inner.num_relations());
        let mut rows = Vec::with_capacity(ne * nr);
        for r in 0..nr as RelationId {
            for h in 0..ne as EntityId {
                rows.push(inner.row(r, h)?);
            }
        }
        Ok(DenseScorer {
            num_entities: ne,
            num_relations: nr,
            rows,
        })
    }
}

impl Scorer for DenseScorer {
    fn name(&self) -> &str {
        "dense"
    }

    fn num_entities(&self) -> usize {
        self.num_entities
    }

    fn num_relations(&self) -> usize {
        self.num_relations
    }

    fn row(&self, relation: RelationId, head: EntityId) -> Result<Arc<[f64]>> {
        check_bounds("relation", relation as usize, self.num_relations)?;
        check_bounds("entity", head as usize, self.num_entities)?;
        Ok(self.rows[relation as usize * self.num_entities + head as usize].clone())
    }
}

type RowCache = LruCache<(RelationId, EntityId), Arc<[f64]>>;

/// Lazily materialized rows of another scorer, bounded by an LRU of `capacity` rows.
pub struct CachedScorer {
    inner: Arc<dyn Scorer>,
    cache: Mutex<RowCache>,
}

impl CachedScorer {
    pub const DEFAULT_CAPACITY: usize = 64;

    pub fn new(inner: Arc<dyn Scorer>, capacity: usize) -> Result<Self> {
        let capacity = NonZeroUsize::new(capacity)
            .ok_or_else(|| Error::InvalidInput("row cache capacity must be at least 1".into()))?;
        Ok(CachedScorer {
            inner,
            cache: Mutex::new(LruCache::new(capacity)),
        })
    }

    pub fn cached_rows(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }
}

impl Scorer for CachedScorer {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn num_entities(&self) -> usize {
        self.inner.num_entities()
    }

    fn num_relations(&self) -> usize {
        self.inner.num_relations()
    }

    fn row(&self, relation: RelationId, head: EntityId) -> Result<Arc<[f64]>> {
        let key = (relation, head);
        if let Some(row) = self
            .cache
            .lock()
            .map_err(|_| Error::InvalidState("row cache lock poisoned".into()))?
            .get(&key)
        {
            return Ok(row.clone());
        }
        // Computed outside the lock; concurrent misses may compute the same row twice.
        let row = self.inner.row(relation, head)?;
        self.cache
            .lock()
            .map_err(|_| Error::InvalidState("row cache lock poisoned".into()))?
            .put(key, row.clone());
        Ok(row)
    }
}
