//! A trained classifier bundled with its vocabulary and feature settings, plus
//! a plain-text dump format.
//!
//! The dump is line oriented. A header of `key=value` lines comes first, then a
//! `---` separator, then one tab-separated line per vocabulary gram in column
//! order:
//!
//! ```text
//! # discourse-signal model v1
//! variant=multinomial_nb
//! alpha=1
//! ngram_range=1 1
//! min_df=1
//! tfidf=false
//! corpus_size=3
//! vocab_hash=<sha256 of the vocabulary CSV>
//! class_log_prior=-0.4054651081081644 -1.0986122886681098
//! ---
//! bad  1  -1.6094379124341003  -0.6931471805599453
//! good  2  -0.2231435513142097  -1.3862943611198906
//! ```
//!
//! Naive Bayes bodies carry `gram, df, ln P(gram|positive), ln P(gram|negative)`;
//! logistic regression bodies carry `gram, df, weight` and the header adds
//! `intercept` and the optimiser settings. Floats are written in shortest
//! round-trip form, so load(dump(m)) reproduces every parameter bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::annotation::Label;
use crate::error::{Error, Result};
use crate::features::{
    build_vocabulary, featurize, vectorize, FeatureOptions, Gram, NgramRange, SparseVector,
    Vocabulary,
};

use super::lr::{predict_lr, train_lr, Convergence, LrModel, LrOptions};
use super::nb::{posterior, predict_nb, train_nb, NbModel, NbVariant};
use super::ClassifierSpec;

const MAGIC: &str = "# discourse-signal model v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NaiveBayes(NbModel),
    Logistic(LrModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Posterior probability of the positive class.
    pub positive_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextClassifier {
    pub features: FeatureOptions,
    pub vocabulary: Vocabulary,
    pub model: Model,
}

impl TextClassifier {
    /// Builds the vocabulary from `texts`, featurises them and trains `spec`.
    pub fn fit<S: AsRef<str>>(
        texts: &[S],
        labels: &[Label],
        spec: &ClassifierSpec,
        features: &FeatureOptions,
    ) -> Result<Self> {
        let vocabulary = build_vocabulary(texts, features.ngram_range, features.min_df)?;
        let x = featurize(texts, &vocabulary, features)?;
        let model = match *spec {
            ClassifierSpec::MultinomialNb { alpha } => {
                Model::NaiveBayes(train_nb(&x, labels, NbVariant::Multinomial, alpha)?)
            }
            ClassifierSpec::BernoulliNb { alpha } => {
                Model::NaiveBayes(train_nb(&x, labels, NbVariant::Bernoulli, alpha)?)
            }
            ClassifierSpec::LogisticRegression(opts) => {
                Model::Logistic(train_lr(&x, labels, opts)?)
            }
        };
        Ok(TextClassifier {
            features: *features,
            vocabulary,
            model,
        })
    }

    pub fn spec(&self) -> ClassifierSpec {
        match &self.model {
            Model::NaiveBayes(m) => match m.variant {
                NbVariant::Multinomial => ClassifierSpec::MultinomialNb { alpha: m.alpha },
                NbVariant::Bernoulli => ClassifierSpec::BernoulliNb { alpha: m.alpha },
            },
            Model::Logistic(m) => ClassifierSpec::LogisticRegression(m.options),
        }
    }

    fn vector(&self, text: &str) -> SparseVector {
        let counts = vectorize(text, &self.vocabulary);
        if self.features.tfidf {
            SparseVector::from_pairs(
                counts
                    .iter()
                    .map(|(i, tf)| (i, tf * self.vocabulary.idf(i)))
                    .collect(),
            )
        } else {
            counts
        }
    }

    pub fn predict_text(&self, text: &str) -> Prediction {
        let x = self.vector(text);
        match &self.model {
            Model::NaiveBayes(m) => {
                let (label, scores) = predict_nb(m, &x);
                Prediction {
                    label,
                    positive_probability: posterior(scores)[0],
                }
            }
            Model::Logistic(m) => {
                let (label, p) = predict_lr(m, &x);
                Prediction {
                    label,
                    positive_probability: p,
                }
            }
        }
    }

    /// Predictions in input order.
    pub fn predict_all<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<Prediction> {
        texts
            .par_iter()
            .map(|t| self.predict_text(t.as_ref()))
            .collect()
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "variant={}", self.spec().kind());
        let range = self.features.ngram_range;
        match &self.model {
            Model::NaiveBayes(m) => {
                let _ = writeln!(out, "alpha={}", m.alpha);
            }
            Model::Logistic(m) => {
                let o = m.options;
                let _ = writeln!(out, "learning_rate={}", o.learning_rate);
                let _ = writeln!(out, "max_iter={}", o.max_iter);
                let _ = writeln!(out, "tol={}", o.tol);
                let _ = writeln!(out, "l2={}", o.l2);
            }
        }
        let _ = writeln!(out, "ngram_range={} {}", range.low(), range.high());
        let _ = writeln!(out, "min_df={}", self.features.min_df);
        let _ = writeln!(out, "tfidf={}", self.features.tfidf);
        let _ = writeln!(out, "corpus_size={}", self.vocabulary.corpus_size());
        let _ = writeln!(out, "vocab_hash={}", self.vocabulary.fingerprint());
        match &self.model {
            Model::NaiveBayes(m) => {
                let _ = writeln!(
                    out,
                    "class_log_prior={} {}",
                    m.class_log_prior[0], m.class_log_prior[1]
                );
            }
            Model::Logistic(m) => {
                let c = m.convergence;
                let _ = writeln!(out, "intercept={}", m.intercept);
                let _ = writeln!(out, "iterations={}", c.iterations);
                let _ = writeln!(out, "gradient_norm={}", c.gradient_norm);
                let _ = writeln!(out, "converged={}", c.converged);
            }
        }
        out.push_str("---\n");
        for (i, gram) in self.vocabulary.grams().iter().enumerate() {
            let df = self.vocabulary.document_frequency(i);
            match &self.model {
                Model::NaiveBayes(m) => {
                    let _ = writeln!(
                        out,
                        "{gram}\t{df}\t{}\t{}",
                        m.feature_log_prob[0][i], m.feature_log_prob[1][i]
                    );
                }
                Model::Logistic(m) => {
                    let _ = writeln!(out, "{gram}\t{df}\t{}", m.weights[i]);
                }
            }
        }
        out
    }

    pub fn from_dump(text: &str, origin: &Path) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::parse(origin, line, msg);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            _ => return Err(bad(1, format!("expected {MAGIC:?}"))),
        }
        let mut header: HashMap<&str, (usize, &str)> = HashMap::new();
        let mut separated = false;
        for (n, line) in lines.by_ref() {
            if line == "---" {
                separated = true;
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(n, format!("expected key=value, got {line:?}")))?;
            header.insert(k, (n, v));
        }
        if !separated {
            return Err(bad(0, "missing --- separator".into()));
        }
        let field = |key: &str| -> Result<(usize, &str)> {
            header
                .get(key)
                .copied()
                .ok_or_else(|| Error::Schema(format!("{}: header lacks {key}", origin.display())))
        };
        fn num<T: std::str::FromStr>(origin: &Path, (n, v): (usize, &str)) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::parse(origin, n, format!("cannot parse {v:?}")))
        }

        let variant = field("variant")?;
        let spec = match variant.1 {
            "multinomial_nb" => ClassifierSpec::MultinomialNb {
                alpha: num(origin, field("alpha")?)?,
            },
            "bernoulli_nb" => ClassifierSpec::BernoulliNb {
                alpha: num(origin, field("alpha")?)?,
            },
            "logistic_regression" => ClassifierSpec::LogisticRegression(LrOptions {
                learning_rate: num(origin, field("learning_rate")?)?,
                max_iter: num(origin, field("max_iter")?)?,
                tol: num(origin, field("tol")?)?,
                l2: num(origin, field("l2")?)?,
            }),
            other => return Err(bad(variant.0, format!("unknown variant {other:?}"))),
        };
        let range_field = field("ngram_range")?;
        let range = match range_field.1.split_once(' ') {
            Some((lo, hi)) => NgramRange::new(
                num(origin, (range_field.0, lo))?,
                num(origin, (range_field.0, hi))?,
            )?,
            None => return Err(bad(range_field.0, "ngram_range needs two numbers".into())),
        };
        let features = FeatureOptions {
            ngram_range: range,
            min_df: num(origin, field("min_df")?)?,
            tfidf: num(origin, field("tfidf")?)?,
        };
        let corpus_size: usize = num(origin, field("corpus_size")?)?;

        let width = match spec {
            ClassifierSpec::LogisticRegression(_) => 3,
            _ => 4,
        };
        let mut entries = Vec::new();
        let mut params: Vec<Vec<f64>> = Vec::new();
        for (n, line) in lines {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != width {
                return Err(bad(n, format!("expected {width} tab-separated fields")));
            }
            let gram = Gram::new(cells[0].split(' ').map(str::to_owned).collect());
            entries.push((gram, num(origin, (n, cells[1]))?));
            params.push(
                cells[2..]
                    .iter()
                    .map(|c| num(origin, (n, *c)))
                    .collect::<Result<_>>()?,
            );
        }
        let grams_in_order: Vec<String> = entries.iter().map(|(g, _)| g.key()).collect();
        let vocabulary = Vocabulary::from_parts(entries, range, corpus_size)?;
        if vocabulary
            .grams()
            .iter()
            .map(Gram::key)
            .ne(grams_in_order.iter().cloned())
        {
            return Err(Error::Validation(
                "model body grams are not in vocabulary order".into(),
            ));
        }
        let hash = field("vocab_hash")?.1;
        if vocabulary.fingerprint() != hash {
            return Err(Error::Validation(format!(
                "{}: vocabulary hash mismatch",
                origin.display()
            )));
        }

        let model = match spec {
            ClassifierSpec::MultinomialNb { alpha } | ClassifierSpec::BernoulliNb { alpha } => {
                let variant = if matches!(spec, ClassifierSpec::MultinomialNb { .. }) {
                    NbVariant::Multinomial
                } else {
                    NbVariant::Bernoulli
                };
                let prior_field = field("class_log_prior")?;
                let prior = match prior_field.1.split_once(' ') {
                    Some((a, b)) => [
                        num(origin, (prior_field.0, a))?,
                        num(origin, (prior_field.0, b))?,
                    ],
                    None => {
                        return Err(bad(
                            prior_field.0,
                            "class_log_prior needs two numbers".into(),
                        ))
                    }
                };
                let pos = params.iter().map(|p| p[0]).collect();
                let neg = params.iter().map(|p| p[1]).collect();
                Model::NaiveBayes(NbModel::from_parts(variant, alpha, prior, [pos, neg])?)
            }
            ClassifierSpec::LogisticRegression(options) => Model::Logistic(LrModel {
                intercept: num(origin, field("intercept")?)?,
                weights: params.iter().map(|p| p[0]).collect(),
                options,
                convergence: Convergence {
                    iterations: num(origin, field("iterations")?)?,
                    gradient_norm: num(origin, field("gradient_norm")?)?,
                    converged: num(origin, field("converged")?)?,
                },
            }),
        };
        Ok(TextClassifier {
            features,
            vocabulary,
            model,
        })
    }
}

pub fn save_model(classifier: &TextClassifier, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, classifier.dump()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TextClassifier> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TextClassifier::from_dump(&text, path)
}
