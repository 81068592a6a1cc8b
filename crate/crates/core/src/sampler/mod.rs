//! Benchmark query generation with oracle-labeled easy and hard answers.

mod ground;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, GraphStack, Layer};
use crate::query::{write_jsonl, Pattern, QueryInstance};
use crate::rng::{self, Rng};
use crate::symbolic::label_answers;

use ground::{seed_entities, Grounder};

pub const STATS_FORMAT_VERSION: u32 = 1;

/// Output file of each split inside a dataset directory.
pub fn queries_file(layer: Layer) -> &'static str {
    match layer {
        Layer::Train => "train-queries.jsonl",
        Layer::Valid => "valid-queries.jsonl",
        Layer::Test => "test-queries.jsonl",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub seed: u64,
    /// Upper bound on `|easy ∪ hard|` per query.
    pub max_answers: usize,
    /// Valid/test queries must have at least one hard answer.
    pub require_hard: bool,
    /// Ground every union branch from the same seed answer.
    pub share_union_anchors: bool,
    pub max_attempts: usize,
    /// Reject valid/test 1p queries that have easy answers.
    pub exclude_easy_1p: bool,
    pub train_counts: BTreeMap<String, usize>,
    pub valid_counts: BTreeMap<String, usize>,
    pub test_counts: BTreeMap<String, usize>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        let counts = |patterns: &[Pattern], n: usize| patterns.iter().map(|p| (p.name().to_string(), n)).collect();
        SampleConfig {
            seed: 0,
            max_answers: 100,
            require_hard: true,
            share_union_anchors: false,
            max_attempts: 1000,
            exclude_easy_1p: false,
            train_counts: counts(&Pattern::TRAINING, 100),
            valid_counts: counts(&Pattern::ALL, 20),
            test_counts: counts(&Pattern::ALL, 20),
        }
    }
}

impl SampleConfig {
    /// Every count set to zero.
    pub fn empty() -> Self {
        SampleConfig {
            train_counts: BTreeMap::new(),
            valid_counts: BTreeMap::new(),
            test_counts: BTreeMap::new(),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SampleConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn counts(&self, layer: Layer) -> &BTreeMap<String, usize> {
        match layer {
            Layer::Train => &self.train_counts,
            Layer::Valid => &self.valid_counts,
            Layer::Test => &self.test_counts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_answers == 0 {
            return Err(Error::Validation("max_answers must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::Validation("max_attempts must be at least 1".into()));
        }
        for layer in Layer::ALL {
            for name in self.counts(layer).keys() {
                let pattern: Pattern = name.parse()?;
                if layer == Layer::Train && !pattern.is_training() {
                    return Err(Error::Validation(format!("pattern `{name}` is evaluation-only")));
                }
            }
        }
        Ok(())
    }

    /// Requested count per pattern in canonical order.
    fn plan(&self, layer: Layer) -> Vec<(Pattern, usize)> {
        let counts = self.counts(layer);
        Pattern::ALL
            .into_iter()
            .filter_map(|p| counts.get(p.name()).map(|&n| (p, n)))
            .filter(|&(_, n)| n > 0)
            .collect()
    }
}

/// Samples one labeled query of `pattern` for split `layer`.
///
/// Anchors are grounded on the split's own layer; answers are labeled
/// against the training layer.
pub fn sample_query(
    pattern: Pattern,
    layer: Layer,
    stack: &GraphStack,
    cfg: &SampleConfig,
    rng: &mut Rng,
) -> Result<QueryInstance> {
    let graph = stack.layer(layer);
    let seeds = seed_entities(graph);
    let grounder = Grounder::new(graph, &seeds, cfg.share_union_anchors);
    sample_with(&grounder, pattern, layer, stack, cfg, rng)
}

fn sample_with(
    grounder: &Grounder<'_>,
    pattern: Pattern,
    layer: Layer,
    stack: &GraphStack,
    cfg: &SampleConfig,
    rng: &mut Rng,
) -> Result<QueryInstance> {
    let eval = stack.layer(layer);
    for _ in 0..cfg.max_attempts {
        let Some(query) = grounder.attempt(pattern, rng)? else {
            continue;
        };
        let labels = label_answers(&query, &stack.train, eval)?;
        let total = labels.easy.len() + labels.hard.len();
        if total == 0 || total > cfg.max_answers {
            continue;
        }
        if layer != Layer::Train {
            if cfg.require_hard && labels.hard.is_empty() {
                continue;
            }
            if cfg.exclude_easy_1p && pattern == Pattern::P1 && !labels.easy.is_empty() {
                continue;
            }
        }
        return Ok(QueryInstance {
            id: String::new(),
            pattern: pattern.name().to_string(),
            query,
            easy: labels.easy,
            hard: labels.hard,
        });
    }
    Err(Error::SamplingExhausted { pattern: pattern.name().to_string(), attempts: cfg.max_attempts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternStats {
    pub pattern: String,
    pub count: usize,
    pub mean_easy: f64,
    pub mean_hard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub split: Layer,
    pub patterns: Vec<PatternStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub format_version: u32,
    pub rng_algorithm: String,
    pub seed: u64,
    pub splits: Vec<SplitStats>,
}

/// Queries of every split, ordered by split, then pattern, then index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<QueryInstance>,
    pub valid: Vec<QueryInstance>,
    pub test: Vec<QueryInstance>,
    pub stats: DatasetStats,
}

impl Dataset {
    pub fn split(&self, layer: Layer) -> &[QueryInstance] {
        match layer {
            Layer::Train => &self.train,
            Layer::Valid => &self.valid,
            Layer::Test => &self.test,
        }
    }
}

fn mean(values: impl Iterator<Item = usize>, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        values.sum::<usize>() as f64 / n as f64
    }
}

/// Samples all splits in memory. Patterns run in parallel on sub-seeds `seed ^ index`.
pub fn generate_dataset(cfg: &SampleConfig, stack: &GraphStack) -> Result<Dataset> {
    cfg.validate()?;
    let seeds: Vec<Vec<EntityId>> = Layer::ALL.iter().map(|&l| seed_entities(stack.layer(l))).collect();
    let jobs: Vec<(Layer, Pattern, usize)> = Layer::ALL
        .into_iter()
        .flat_map(|layer| cfg.plan(layer).into_iter().map(move |(p, n)| (layer, p, n)))
        .collect();
    let batches: Vec<Vec<QueryInstance>> = jobs
        .par_iter()
        .map(|&(layer, pattern, n)| {
            let li = Layer::ALL.iter().position(|&l| l == layer).unwrap_or(0);
            let grounder = Grounder::new(stack.layer(layer), &seeds[li], cfg.share_union_anchors);
            let mut rng = rng::substream(cfg.seed ^ pattern.index() as u64, layer.name());
            (0..n)
                .map(|i| {
                    let mut inst = sample_with(&grounder, pattern, layer, stack, cfg, &mut rng)?;
                    inst.id = format!("{layer}-{pattern}-{i}");
                    Ok(inst)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut per_layer: BTreeMap<usize, Vec<QueryInstance>> = BTreeMap::new();
    let mut splits: Vec<SplitStats> =
        Layer::ALL.iter().map(|&split| SplitStats { split, patterns: Vec::new() }).collect();
    for (&(layer, pattern, n), batch) in jobs.iter().zip(batches) {
        let li = Layer::ALL.iter().position(|&l| l == layer).unwrap_or(0);
        splits[li].patterns.push(PatternStats {
            pattern: pattern.name().to_string(),
            count: batch.len(),
            mean_easy: mean(batch.iter().map(|b| b.easy.len()), n),
            mean_hard: mean(batch.iter().map(|b| b.hard.len()), n),
        });
        per_layer.entry(li).or_default().extend(batch);
    }
    let mut take = |i| per_layer.remove(&i).unwrap_or_default();
    Ok(Dataset {
        train: take(0),
        valid: take(1),
        test: take(2),
        stats: DatasetStats {
            format_version: STATS_FORMAT_VERSION,
            rng_algorithm: rng::RNG_ALGORITHM.to_string(),
            seed: cfg.seed,
            splits,
        },
    })
}

/// Samples and writes the three query files plus `stats.json`. Nothing is left behind on failure.
pub fn sample_dataset(cfg: &SampleConfig, stack: &GraphStack, out_dir: &Path) -> Result<DatasetStats> {
    let dataset = generate_dataset(cfg, stack)?;
    fs::create_dir_all(out_dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        for layer in Layer::ALL {
            let path = out_dir.join(queries_file(layer));
            written.push(path.clone());
            write_jsonl(&path, dataset.split(layer), stack)?;
        }
        let path = out_dir.join("stats.json");
        written.push(path.clone());
        fs::write(&path, serde_json::to_string_pretty(&dataset.stats)? + "\n")?;
        Ok(())
    })();
    if let Err(e) = result {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        return Err(e);
    }
    log::info!(
        "sampled {} train, {} valid, {} test queries",
        dataset.train.len(),
        dataset.valid.len(),
        dataset.test.len()
    );
    Ok(dataset.stats)
}
