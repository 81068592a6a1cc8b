use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::EntityId;

/// Slack allowed on membership values before they are rejected rather than clamped.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

/// Clamp `x` into [0, 1] if it lies within [`DOMAIN_TOLERANCE`] of the interval.
pub fn check_unit(x: f64) -> Result<f64> {
    if (-DOMAIN_TOLERANCE..=1.0 + DOMAIN_TOLERANCE).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(Error::Domain(x))
    }
}

/// Membership vector over every entity of a graph, each entry in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FuzzySet(Vec<f64>);

impl FuzzySet {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            *v = check_unit(*v)?;
        }
        Ok(FuzzySet(values))
    }

    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        FuzzySet(values)
    }

    pub fn empty(len: usize) -> Self {
        FuzzySet(vec![0.0; len])
    }

    /// The all-ones vector.
    pub fn universe(len: usize) -> Self {
        FuzzySet(vec![1.0; len])
    }

    pub fn indicator<I>(len: usize, members: I) -> Self
    where
        I: IntoIterator<Item = EntityId>,
    {
        let mut values = vec![0.0; len];
        for e in members {
            values[e as usize] = 1.0;
        }
        FuzzySet(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, entity: EntityId) -> f64 {
        self.0[entity as usize]
    }

    /// Entities whose membership is at least `threshold`, ascending.
    pub fn support(&self, threshold: f64) -> Vec<EntityId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= threshold)
            .map(|(i, _)| i as EntityId)
            .collect()
    }

    pub fn complement(&self) -> FuzzySet {
        FuzzySet(self.0.iter().map(|&v| 1.0 - v).collect())
    }
}

impl TryFrom<Vec<f64>> for FuzzySet {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FuzzySet::new(values)
    }
}

impl From<FuzzySet> for Vec<f64> {
    fn from(set: FuzzySet) -> Self {
        set.0
    }
}

impl AsRef<[f64]> for FuzzySet {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
