//! Filtered ranking over hard answers, faithfulness, and cardinality estimation quality.

mod rank;
mod stats;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::QueryEngine;
use crate::error::{Error, Result};
use crate::query::{Pattern, QueryInstance};

pub use rank::filtered_rank;
pub use stats::{average_ranks, pearson, spearman};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Default membership threshold for counting predicted answers.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RankingMetrics {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub queries: usize,
    pub hard_answers: usize,
}

impl RankingMetrics {
    fn mean_of(items: &[RankingMetrics]) -> RankingMetrics {
        let n = items.len().max(1) as f64;
        RankingMetrics {
            mrr: items.iter().map(|m| m.mrr).sum::<f64>() / n,
            hits1: items.iter().map(|m| m.hits1).sum::<f64>() / n,
            hits3: items.iter().map(|m| m.hits3).sum::<f64>() / n,
            hits10: items.iter().map(|m| m.hits10).sum::<f64>() / n,
            queries: items.iter().map(|m| m.queries).sum(),
            hard_answers: items.iter().map(|m| m.hard_answers).sum(),
        }
    }

    /// Pools per-query metrics, weighting every query equally.
    fn pooled(items: &[RankingMetrics]) -> RankingMetrics {
        let q = items.iter().map(|m| m.queries).sum::<usize>();
        let w = |f: fn(&RankingMetrics) -> f64| {
            if q == 0 {
                0.0
            } else {
                items.iter().map(|m| f(m) * m.queries as f64).sum::<f64>() / q as f64
            }
        };
        RankingMetrics {
            mrr: w(|m| m.mrr),
            hits1: w(|m| m.hits1),
            hits3: w(|m| m.hits3),
            hits10: w(|m| m.hits10),
            queries: q,
            hard_answers: items.iter().map(|m| m.hard_answers).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub pattern: String,
    #[serde(flatten)]
    pub metrics: RankingMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityReport {
    pub threshold: f64,
    pub spearman: Option<f64>,
    /// Percent.
    pub mape: Option<f64>,
    pub included: usize,
    pub excluded_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub format_version: u32,
    pub engine: String,
    pub per_pattern: Vec<PatternMetrics>,
    /// Every query weighted equally.
    pub micro: RankingMetrics,
    /// Every pattern weighted equally.
    #[serde(rename = "macro")]
    pub macro_avg: RankingMetrics,
    /// Records without hard answers.
    pub skipped: usize,
    pub faithfulness: Option<f64>,
    pub cardinality: Option<CardinalityReport>,
}

impl RankingReport {
    pub fn pattern(&self, name: &str) -> Option<&RankingMetrics> {
        self.per_pattern.iter().find(|p| p.pattern == name).map(|p| &p.metrics)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "pattern", "queries", "answers", "MRR", "H@1", "H@3", "H@10"
        );
        let mut row = |name: &str, m: &RankingMetrics| {
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>8} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                name, m.queries, m.hard_answers, m.mrr, m.hits1, m.hits3, m.hits10
            );
        };
        for p in &self.per_pattern {
            row(&p.pattern, &p.metrics);
        }
        row("micro", &self.micro);
        row("macro", &self.macro_avg);
        if let Some(f) = self.faithfulness {
            let _ = writeln!(out, "faithfulness AUC {f:.4}");
        }
        if let Some(c) = &self.cardinality {
            let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "cardinality spearman {} mape {}% ({} records, {} zero-count excluded)",
                fmt(c.spearman),
                fmt(c.mape),
                c.included,
                c.excluded_zero
            );
        }
        out
    }
}

fn checked_scores(engine: &dyn QueryEngine, record: &QueryInstance, n: Option<usize>) -> Result<Vec<f64>> {
    let scores = engine.scores(&record.query)?;
    if let Some(n) = n {
        if scores.len() != n {
            return Err(Error::InvalidState(format!(
                "engine returned {} scores, expected {n}",
                scores.len()
            )));
        }
    }
    Ok(scores)
}

/// Filtered metrics of one query, averaged over its hard answers.
fn query_metrics(scores: &[f64], record: &QueryInstance) -> Result<RankingMetrics> {
    let mut mask = vec![false; scores.len()];
    for e in record.answers() {
        crate::error::check_bounds("entity", e as usize, scores.len())?;
        mask[e as usize] = true;
    }
    let mut m = RankingMetrics { queries: 1, hard_answers: record.hard.len(), ..Default::default() };
    for &t in &record.hard {
        mask[t as usize] = false;
        let rank = rank::masked_rank(scores, t, &mask);
        mask[t as usize] = true;
        m.mrr += 1.0 / rank as f64;
        m.hits1 += (rank <= 1) as u8 as f64;
        m.hits3 += (rank <= 3) as u8 as f64;
        m.hits10 += (rank <= 10) as u8 as f64;
    }
    let k = record.hard.len() as f64;
    m.mrr /= k;
    m.hits1 /= k;
    m.hits3 /= k;
    m.hits10 /= k;
    Ok(m)
}

/// Ranks every hard answer against all entities except the other known answers.
pub fn evaluate(records: &[QueryInstance], engine: &dyn QueryEngine) -> Result<RankingReport> {
    let ranked: Vec<&QueryInstance> = records.iter().filter(|r| !r.hard.is_empty()).collect();
    let skipped = records.len() - ranked.len();
    if skipped > 0 {
        log::warn!("skipped {skipped} records without hard answers");
    }
    let per_query: Vec<(String, RankingMetrics)> = ranked
        .par_iter()
        .map(|r| {
            let scores = checked_scores(engine, r, None)?;
            Ok((r.pattern.clone(), query_metrics(&scores, r)?))
        })
        .collect::<Result<_>>()?;

    let mut names: Vec<String> = per_query.iter().map(|(p, _)| p.clone()).collect();
    names.sort_by_key(|n| (n.parse::<Pattern>().map(Pattern::index).unwrap_or(usize::MAX), n.clone()));
    names.dedup();
    let per_pattern: Vec<PatternMetrics> = names
        .into_iter()
        .map(|pattern| {
            let items: Vec<RankingMetrics> =
                per_query.iter().filter(|(p, _)| *p == pattern).map(|(_, m)| *m).collect();
            PatternMetrics { pattern, metrics: RankingMetrics::mean_of(&items) }
        })
        .collect();
    let pattern_items: Vec<RankingMetrics> = per_pattern.iter().map(|p| p.metrics).collect();
    Ok(RankingReport {
        format_version: REPORT_FORMAT_VERSION,
        engine: engine.name().to_string(),
        micro: RankingMetrics::pooled(&pattern_items),
        macro_avg: RankingMetrics::mean_of(&pattern_items),
        per_pattern,
        skipped,
        faithfulness: None,
        cardinality: None,
    })
}

/// Probability that an easy answer outscores a hard one, ties counted half; macro-averaged over queries.
pub fn faithfulness_auc(records: &[QueryInstance], engine: &dyn QueryEngine) -> Result<f64> {
    let usable: Vec<&QueryInstance> =
        records.iter().filter(|r| !r.easy.is_empty() && !r.hard.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::UndefinedMetric("no record has both easy and hard answers".into()));
    }
    let aucs: Vec<f64> = usable
        .par_iter()
        .map(|r| {
            let scores = checked_scores(engine, r, None)?;
            let get = |e: u32| -> Result<f64> {
                crate::error::check_bounds("entity", e as usize, scores.len())?;
                Ok(scores[e as usize])
            };
            let mut wins = 0.0;
            for &p in &r.easy {
                let sp = get(p)?;
                for &n in &r.hard {
                    let sn = get(n)?;
                    wins += if sp > sn {
                        1.0
                    } else if sp == sn {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
            Ok(wins / (r.easy.len() * r.hard.len()) as f64)
        })
        .collect::<Result<_>>()?;
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Predicted count is `|{e : score ≥ θ}|`; truth is `|easy ∪ hard|`.
pub fn cardinality_metrics(
    records: &[QueryInstance],
    engine: &dyn QueryEngine,
    threshold: f64,
) -> Result<CardinalityReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} is outside (0, 1)")));
    }
    let pairs: Vec<(f64, f64)> = records
        .par_iter()
        .map(|r| {
            let scores = checked_scores(engine, r, None)?;
            let predicted = scores.iter().filter(|&&s| s >= threshold).count();
            Ok((predicted as f64, r.answers().len() as f64))
        })
        .collect::<Result<_>>()?;
    let (pred, truth): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let included: Vec<&(f64, f64)> = pairs.iter().filter(|(_, t)| *t > 0.0).collect();
    let excluded_zero = pairs.len() - included.len();
    if excluded_zero > 0 {
        log::warn!("{excluded_zero} records with zero true count excluded from MAPE");
    }
    let mape = (!included.is_empty())
        .then(|| 100.0 * included.iter().map(|(p, t)| (p - t).abs() / t).sum::<f64>() / included.len() as f64);
    Ok(CardinalityReport {
        threshold,
        spearman: spearman(&pred, &truth),
        mape,
        included: included.len(),
        excluded_zero,
    })
}
