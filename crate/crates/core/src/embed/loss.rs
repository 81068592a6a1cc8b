//! Contrastive objectives over one positive score and its negatives.
//!
//! Scores are ComplEx scores; the distance is `-score`.

use crate::error::{Error, Result};

/// Value and gradient of a loss with respect to the positive and negative scores.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub value: f64,
    pub d_positive: f64,
    pub d_negatives: Vec<f64>,
}

pub trait Loss: Send + Sync {
    fn name(&self) -> &'static str;

    fn eval(&self, positive: f64, negatives: &[f64], margin: f64) -> LossEval;
}

/// `ln σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    -(((-x).max(0.0)) + (-x.abs()).exp().ln_1p())
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln σ(γ - dist⁺) - Σ (1/k) ln σ(dist⁻ - γ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogSigmoidLoss;

impl Loss for LogSigmoidLoss {
    fn name(&self) -> &'static str {
        "logsigmoid"
    }

    fn eval(&self, positive: f64, negatives: &[f64], margin: f64) -> LossEval {
        let k = negatives.len().max(1) as f64;
        // dist = -score, so γ - dist⁺ = γ + s⁺ and dist⁻ - γ = -s⁻ - γ
        let mut value = -log_sigmoid(margin + positive);
        let d_positive = -sigmoid(-(margin + positive));
        let d_negatives = negatives
            .iter()
            .map(|&s| {
                value -= log_sigmoid(-s - margin) / k;
                sigmoid(s + margin) / k
            })
            .collect();
        LossEval {
            value,
            d_positive,
            d_negatives,
        }
    }
}

/// `(1/k) Σ max(0, γ + dist⁺ - dist⁻)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MarginLoss;

impl Loss for MarginLoss {
    fn name(&self) -> &'static str {
        "margin"
    }

    fn eval(&self, positive: f64, negatives: &[f64], margin: f64) -> LossEval {
        let k = negatives.len().max(1) as f64;
        let mut value = 0.0;
        let mut d_positive = 0.0;
        let d_negatives = negatives
            .iter()
            .map(|&s| {
                let violation = margin - positive + s;
                if violation > 0.0 {
                    value += violation / k;
                    d_positive -= 1.0 / k;
                    1.0 / k
                } else {
                    0.0
                }
            })
            .collect();
        LossEval {
            value,
            d_positive,
            d_negatives,
        }
    }
}

/// Softmax cross-entropy of the positive against its negatives; the margin is unused.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossEntropyLoss;

impl Loss for CrossEntropyLoss {
    fn name(&self) -> &'static str {
        "cross-entropy"
    }

    fn eval(&self, positive: f64, negatives: &[f64], _margin: f64) -> LossEval {
        let max = negatives.iter().copied().fold(positive, f64::max);
        let z: f64 = (positive - max).exp() + negatives.iter().map(|s| (s - max).exp()).sum::<f64>();
        let log_z = max + z.ln();
        LossEval {
            value: log_z - positive,
            d_positive: (positive - log_z).exp() - 1.0,
            d_negatives: negatives.iter().map(|s| (s - log_z).exp()).collect(),
        }
    }
}

pub const LOSS_NAMES: [&str; 3] = ["logsigmoid", "margin", "cross-entropy"];

/// Looks up a loss by its registered name.
pub fn loss_by_name(name: &str) -> Result<Box<dyn Loss>> {
    match name {
        "logsigmoid" => Ok(Box::new(LogSigmoidLoss)),
        "margin" => Ok(Box::new(MarginLoss)),
        "cross-entropy" => Ok(Box::new(CrossEntropyLoss)),
        other => Err(Error::UnknownName {
            kind: "loss",
            name: other.to_owned(),
            known: LOSS_NAMES.join(", "),
        }),
    }
}
