use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ngdb::embed::{CalibratedScorer, TrainConfig};
use ngdb::fuzzy::{CachedScorer, Logic, UnionStrategy, DEFAULT_EPSILON};
use ngdb::eval::DEFAULT_THRESHOLD;
use ngdb::sampler::SampleConfig;
use ngdb::{Error, Result};

/// Every knob of a run. Loaded from JSON, then overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Overrides the sampler and training seeds when set.
    pub seed: Option<u64>,
    pub engine: String,
    pub logic: Logic,
    /// Required by, and only allowed with, the beam engine.
    pub beam_width: Option<usize>,
    pub union: UnionStrategy,
    pub train: TrainConfig,
    pub sampler: SampleConfig,
    pub threshold: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub cache_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph_dir: None,
            out_dir: None,
            seed: None,
            engine: "continuous".into(),
            logic: Logic::Product,
            beam_width: None,
            union: UnionStrategy::Conorm,
            train: TrainConfig::default(),
            sampler: SampleConfig::default(),
            threshold: DEFAULT_THRESHOLD,
            epsilon: DEFAULT_EPSILON,
            beta: CalibratedScorer::DEFAULT_BETA,
            cache_size: CachedScorer::DEFAULT_CAPACITY,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path).map_err(ngdb::error::io_at(path))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// Pushes the run seed into the sampler and trainer, then checks consistency.
    pub fn finish(mut self) -> Result<Self> {
        if let Some(seed) = self.seed {
            self.sampler.seed = seed;
            self.train.seed = seed;
        }
        let beam = self.engine == "beam";
        match (beam, self.beam_width) {
            (true, None) => return Err(Error::Validation("engine beam needs a beam width (--k)".into())),
            (false, Some(_)) => {
                return Err(Error::Validation(format!("beam width given for engine {}", self.engine)))
            }
            (true, Some(0)) => return Err(Error::Validation("beam width must be positive".into())),
            _ => {}
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Validation(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::Validation(format!("epsilon {} outside [0, 1)", self.epsilon)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Validation(format!("beta {} must be positive", self.beta)));
        }
        if self.cache_size == 0 {
            return Err(Error::Validation("cache size must be positive".into()));
        }
        self.sampler.validate()?;
        self.train.validate()?;
        Ok(self)
    }

    pub fn graph_dir(&self) -> Result<&Path> {
        self.graph_dir
            .as_deref()
            .ok_or_else(|| Error::Validation("no graph directory (--graph-dir)".into()))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out_dir.as_deref().ok_or_else(|| Error::Validation("no output directory (--out)".into()))
    }
}
