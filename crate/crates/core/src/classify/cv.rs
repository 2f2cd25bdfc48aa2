use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::Label;
use crate::error::{Error, Result};
use crate::features::FeatureOptions;

use super::metrics::{metrics, ConfusionMatrix, EvalReport};
use super::model::TextClassifier;
use super::{ClassifierSpec, CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Metrics on the pooled confusion matrix, with per-fold accuracies attached.
    pub report: EvalReport,
    pub pooled: ConfusionMatrix,
    pub folds: Vec<ConfusionMatrix>,
}

impl CvReport {
    pub fn mean_fold_accuracy(&self) -> f64 {
        self.report
            .mean_fold_accuracy()
            .unwrap_or(self.report.accuracy)
    }
}

/// Sample indices per fold: a seeded shuffle cut into `k` contiguous slices whose
/// sizes differ by at most one (the first `n % k` folds get the extra sample).
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Argument(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::Argument(format!(
            "{k} folds requested for {n} samples"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// k-fold cross-validation. Each fold trains on the other folds with a vocabulary
/// built from those texts alone and is scored on its held-out slice.
pub fn k_fold_cv<S: AsRef<str> + Sync>(
    texts: &[S],
    labels: &[Label],
    k: usize,
    spec: &ClassifierSpec,
    features: &FeatureOptions,
    seed: u64,
) -> Result<CvReport> {
    if texts.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} texts but {} labels",
            texts.len(),
            labels.len()
        )));
    }
    for class in CLASSES {
        if !labels.contains(&class) {
            return Err(Error::Training(format!(
                "no {class} examples to cross-validate"
            )));
        }
    }
    let folds = fold_assignment(texts.len(), k, seed)?;
    let mut held_out = vec![usize::MAX; texts.len()];
    for (f, idx) in folds.iter().enumerate() {
        for &i in idx {
            held_out[i] = f;
        }
    }
    let matrices = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train: Vec<usize> = (0..texts.len()).filter(|&i| held_out[i] != f).collect();
            let train_texts: Vec<&str> = train.iter().map(|&i| texts[i].as_ref()).collect();
            let train_labels: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
            let classifier = TextClassifier::fit(&train_texts, &train_labels, spec, features)?;
            let mut m = ConfusionMatrix::default();
            for &i in test {
                m.record(labels[i], classifier.predict_text(texts[i].as_ref()).label);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled = matrices
        .iter()
        .fold(ConfusionMatrix::default(), |acc, m| acc.merge(m));
    let mut report = metrics(&pooled)?;
    report.fold_accuracies = matrices
        .iter()
        .map(|m| (m.tp + m.tn) as f64 / m.total() as f64)
        .collect();
    Ok(CvReport {
        report,
        pooled,
        folds: matrices,
    })
}
