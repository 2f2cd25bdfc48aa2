//! Multinomial and Bernoulli Naive Bayes with additive smoothing, scored in log space.

use serde::{Deserialize, Serialize};

use crate::annotation::Label;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

use super::{check_training_data, CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NbVariant {
    Multinomial,
    Bernoulli,
}

/// Class priors and per-gram conditional log-probabilities, indexed `[class][gram]`
/// with classes ordered as [`CLASSES`].
#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    pub variant: NbVariant,
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
    /// `ln(1 - P(t|c))`, used by the Bernoulli likelihood for absent grams.
    neg_log_prob: [Vec<f64>; 2],
}

impl NbModel {
    /// Assembles a model from stored parameters.
    pub fn from_parts(
        variant: NbVariant,
        alpha: f64,
        class_log_prior: [f64; 2],
        feature_log_prob: [Vec<f64>; 2],
    ) -> Result<Self> {
        if feature_log_prob[0].len() != feature_log_prob[1].len() {
            return Err(Error::Validation(
                "class parameter tables differ in length".into(),
            ));
        }
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::Argument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let neg_log_prob = [
            log1m_exp_all(&feature_log_prob[0]),
            log1m_exp_all(&feature_log_prob[1]),
        ];
        Ok(NbModel {
            variant,
            alpha,
            class_log_prior,
            feature_log_prob,
            neg_log_prob,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    /// Unnormalised log posteriors `[positive, negative]`.
    pub fn log_scores(&self, x: &SparseVector) -> [f64; 2] {
        let mut scores = self.class_log_prior;
        for (c, score) in scores.iter_mut().enumerate() {
            match self.variant {
                NbVariant::Multinomial => {
                    *score += x.dot(&self.feature_log_prob[c]);
                }
                NbVariant::Bernoulli => {
                    // sum over absent grams of ln(1-p), then swap in ln p for present ones
                    let absent: f64 = self.neg_log_prob[c].iter().sum();
                    let present: f64 = x
                        .iter()
                        .filter(|&(_, v)| v > 0.0)
                        .map(|(i, _)| self.feature_log_prob[c][i] - self.neg_log_prob[c][i])
                        .sum();
                    *score += absent + present;
                }
            }
        }
        scores
    }
}

fn log1m_exp_all(logs: &[f64]) -> Vec<f64> {
    logs.iter().map(|&l| (-l.exp()).ln_1p()).collect()
}

/// Fits class priors from label frequencies and smoothed per-class gram probabilities.
///
/// Multinomial: `P(t|c) = (count(t, c) + alpha) / (total(c) + alpha * |V|)`.
/// Bernoulli: `P(t|c) = (docs(t, c) + alpha) / (docs(c) + 2 * alpha)`.
pub fn train_nb(x: &FeatureMatrix, y: &[Label], variant: NbVariant, alpha: f64) -> Result<NbModel> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Argument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    check_training_data(x, y)?;
    let v = x.n_cols();
    let mut counts = [vec![0.0; v], vec![0.0; v]];
    let mut docs = [0usize; 2];
    for (row, label) in x.rows().iter().zip(y) {
        let c = class_index(*label);
        docs[c] += 1;
        for (i, value) in row.iter() {
            counts[c][i] += match variant {
                NbVariant::Multinomial => value,
                NbVariant::Bernoulli => f64::from(value > 0.0),
            };
        }
    }
    let n = y.len() as f64;
    let class_log_prior = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
    let feature_log_prob = [0, 1].map(|c| {
        let denom = match variant {
            NbVariant::Multinomial => counts[c].iter().sum::<f64>() + alpha * v as f64,
            NbVariant::Bernoulli => docs[c] as f64 + 2.0 * alpha,
        };
        counts[c]
            .iter()
            .map(|&k| ((k + alpha) / denom).ln())
            .collect::<Vec<_>>()
    });
    NbModel::from_parts(variant, alpha, class_log_prior, feature_log_prob)
}

/// Most probable class and the two unnormalised log posteriors `[positive, negative]`.
/// Exact ties go to the positive class.
pub fn predict_nb(m: &NbModel, x: &SparseVector) -> (Label, [f64; 2]) {
    let scores = m.log_scores(x);
    let label = if scores[0] >= scores[1] {
        Label::Positive
    } else {
        Label::Negative
    };
    (label, scores)
}

/// Normalised posterior `[P(positive|x), P(negative|x)]` computed from log scores.
pub fn posterior(scores: [f64; 2]) -> [f64; 2] {
    let max = scores[0].max(scores[1]);
    let e = scores.map(|s| (s - max).exp());
    let z = e[0] + e[1];
    [e[0] / z, e[1] / z]
}

pub(crate) fn class_index(label: Label) -> usize {
    CLASSES
        .iter()
        .position(|&c| c == label)
        .expect("binary label")
}
