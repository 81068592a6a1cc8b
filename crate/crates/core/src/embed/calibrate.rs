use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fuzzy::{FuzzySet, Scorer};
use crate::kg::{Direction, EntityId, KnowledgeGraph, RelationId};

use super::loss::sigmoid;
use super::table::EmbeddingTable;

/// Maps raw ComplEx scores to `[0, 1]` with `σ(β · (score − μ_r))`, where `μ_r`
/// is the median training-positive score of the relation. Observed training
/// edges are forced to 1.
#[derive(Debug, Clone)]
pub struct CalibratedScorer {
    table: Arc<EmbeddingTable>,
    train: Arc<KnowledgeGraph>,
    beta: f64,
}

impl CalibratedScorer {
    pub const DEFAULT_BETA: f64 = 1.0;

    pub fn new(table: Arc<EmbeddingTable>, train: Arc<KnowledgeGraph>, beta: f64) -> Result<Self> {
        if table.num_entities() != train.num_entities() || table.num_relations() != train.num_relations() {
            return Err(Error::InvalidState(format!(
                "embedding table ({}x{}) does not match graph ({}x{})",
                table.num_entities(),
                table.num_relations(),
                train.num_entities(),
                train.num_relations()
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput("calibration temperature must be positive".into()));
        }
        Ok(CalibratedScorer { table, train, beta })
    }

    /// Calibrated values before the observed-edge override.
    pub fn raw_row(&self, relation: RelationId, head: EntityId) -> Result<Vec<f64>> {
        let mu = self.table.relation_median(relation);
        let scores = self.table.score_tails(head, relation)?;
        Ok(scores
            .into_iter()
            .map(|s| sigmoid(self.beta * (s - mu)).clamp(0.0, 1.0))
            .collect())
    }

    pub fn calibrate(&self, head: EntityId, relation: RelationId) -> Result<FuzzySet> {
        let mut row = self.raw_row(relation, head)?;
        for &t in self.train.neighbors(relation, head, Direction::Forward)? {
            row[t as usize] = 1.0;
        }
        FuzzySet::new(row)
    }
}

impl Scorer for CalibratedScorer {
    fn name(&self) -> &str {
        "calibrated"
    }

    fn num_entities(&self) -> usize {
        self.table.num_entities()
    }

    fn num_relations(&self) -> usize {
        self.table.num_relations()
    }

    fn row(&self, relation: RelationId, head: EntityId) -> Result<Arc<[f64]>> {
        Ok(self.calibrate(head, relation)?.into_vec().into())
    }
}
