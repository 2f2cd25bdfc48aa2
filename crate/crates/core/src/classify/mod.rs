//! Binary sentiment classifiers, evaluation metrics and cross-validation.

mod cv;
mod lr;
mod metrics;
mod model;
mod nb;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use cv::{fold_assignment, k_fold_cv, CvReport};
pub use lr::{
    lr_gradient, lr_objective, predict_lr, sigmoid, train_lr, Convergence, LrModel, LrOptions,
};
pub use metrics::{comparison_csv, metrics, render_comparison, ConfusionMatrix, EvalReport};
pub use model::{load_model, save_model, Model, Prediction, TextClassifier};
pub use nb::{posterior, predict_nb, train_nb, NbModel, NbVariant};

/// Class order used by every per-class table.
pub const CLASSES: [Label; 2] = [Label::Positive, Label::Negative];

/// Which classifier to train, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    MultinomialNb {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    BernoulliNb {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    LogisticRegression(LrOptions),
}

fn default_alpha() -> f64 {
    1.0
}

impl ClassifierSpec {
    pub const DEFAULTS: [ClassifierSpec; 3] = [
        ClassifierSpec::LogisticRegression(LrOptions {
            learning_rate: 0.1,
            max_iter: 10_000,
            tol: 1e-6,
            l2: 1e-4,
        }),
        ClassifierSpec::MultinomialNb { alpha: 1.0 },
        ClassifierSpec::BernoulliNb { alpha: 1.0 },
    ];

    /// Stable identifier used in file names and configs.
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierSpec::MultinomialNb { .. } => "multinomial_nb",
            ClassifierSpec::BernoulliNb { .. } => "bernoulli_nb",
            ClassifierSpec::LogisticRegression(_) => "logistic_regression",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            ClassifierSpec::MultinomialNb { .. } => "Multinomial NB",
            ClassifierSpec::BernoulliNb { .. } => "Bernoulli NB",
            ClassifierSpec::LogisticRegression(_) => "Logistic regression",
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())
    }
}

pub(crate) fn check_training_data(x: &FeatureMatrix, y: &[Label]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::Argument(format!(
            "feature matrix has {} rows but {} labels were given",
            x.n_rows(),
            y.len()
        )));
    }
    for class in CLASSES {
        if !y.contains(&class) {
            return Err(Error::Training(format!(
                "training labels contain no {class} examples"
            )));
        }
    }
    Ok(())
}
