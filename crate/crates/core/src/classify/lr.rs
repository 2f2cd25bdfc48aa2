//! Binary logistic regression fitted by full-batch gradient ascent on the mean log-likelihood.

use serde::{Deserialize, Serialize};

use crate::annotation::Label;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

use super::check_training_data;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrOptions {
    pub learning_rate: f64,
    pub max_iter: usize,
    /// Stop once the largest absolute gradient component falls below this.
    pub tol: f64,
    /// L2 penalty on the weights (the intercept is not penalised).
    pub l2: f64,
}

impl Default for LrOptions {
    fn default() -> Self {
        LrOptions {
            learning_rate: 0.1,
            max_iter: 10_000,
            tol: 1e-6,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub options: LrOptions,
    pub convergence: Convergence,
}

impl LrModel {
    /// All-zero model; predicts 0.5 everywhere.
    pub fn zeros(n_features: usize, options: LrOptions) -> Self {
        LrModel {
            intercept: 0.0,
            weights: vec![0.0; n_features],
            options,
            convergence: Convergence {
                iterations: 0,
                gradient_norm: f64::NAN,
                converged: false,
            },
        }
    }

    pub fn decision(&self, x: &SparseVector) -> f64 {
        self.intercept + x.dot(&self.weights)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn target(label: Label) -> f64 {
    match label {
        Label::Positive => 1.0,
        Label::Negative => 0.0,
    }
}

/// Penalised mean log-likelihood at `(intercept, weights)`.
pub fn lr_objective(
    x: &FeatureMatrix,
    y: &[Label],
    intercept: f64,
    weights: &[f64],
    l2: f64,
) -> f64 {
    let n = y.len() as f64;
    let ll: f64 = x
        .rows()
        .iter()
        .zip(y)
        .map(|(row, &label)| {
            let z = intercept + row.dot(weights);
            // y ln σ(z) + (1 - y) ln(1 - σ(z)) = y z - softplus(z)
            target(label) * z - softplus(z)
        })
        .sum();
    ll / n - 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`lr_objective`]: `(d/d intercept, d/d weights)`.
pub fn lr_gradient(
    x: &FeatureMatrix,
    y: &[Label],
    intercept: f64,
    weights: &[f64],
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = y.len() as f64;
    let mut g0 = 0.0;
    let mut g = vec![0.0; weights.len()];
    for (row, &label) in x.rows().iter().zip(y) {
        let residual = target(label) - sigmoid(intercept + row.dot(weights));
        g0 += residual;
        for (i, v) in row.iter() {
            g[i] += residual * v;
        }
    }
    g0 /= n;
    for (gi, wi) in g.iter_mut().zip(weights) {
        *gi = *gi / n - l2 * wi;
    }
    (g0, g)
}

/// Maximises the (optionally L2-penalised) log-likelihood from a zero start.
pub fn train_lr(x: &FeatureMatrix, y: &[Label], opts: LrOptions) -> Result<LrModel> {
    check_training_data(x, y)?;
    let positive = |v: f64| v > 0.0;
    let non_negative = |v: f64| v >= 0.0;
    if !positive(opts.learning_rate) || !non_negative(opts.l2) || !non_negative(opts.tol) {
        return Err(Error::Argument(format!(
            "learning_rate must be positive and l2, tol non-negative: {opts:?}"
        )));
    }
    let mut model = LrModel::zeros(x.n_cols(), opts);
    for iter in 0..opts.max_iter {
        let (g0, g) = lr_gradient(x, y, model.intercept, &model.weights, opts.l2);
        let norm = g.iter().fold(g0.abs(), |m, v| m.max(v.abs()));
        if !norm.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient at iteration {iter}"
            )));
        }
        model.convergence = Convergence {
            iterations: iter,
            gradient_norm: norm,
            converged: norm < opts.tol,
        };
        if norm < opts.tol {
            return Ok(model);
        }
        model.intercept += opts.learning_rate * g0;
        for (w, gi) in model.weights.iter_mut().zip(&g) {
            *w += opts.learning_rate * gi;
        }
        let loss = lr_objective(x, y, model.intercept, &model.weights, opts.l2);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite log-likelihood at iteration {}",
                iter + 1
            )));
        }
    }
    let (g0, g) = lr_gradient(x, y, model.intercept, &model.weights, opts.l2);
    let norm = g.iter().fold(g0.abs(), |m, v| m.max(v.abs()));
    model.convergence = Convergence {
        iterations: opts.max_iter,
        gradient_norm: norm,
        converged: norm < opts.tol,
    };
    Ok(model)
}

/// `P(positive | x) = σ(w0 + w·x)`; positive iff that probability is at least 0.5.
pub fn predict_lr(m: &LrModel, x: &SparseVector) -> (Label, f64) {
    let p = sigmoid(m.decision(x));
    let label = if p >= 0.5 {
        Label::Positive
    } else {
        Label::Negative
    };
    (label, p)
}
