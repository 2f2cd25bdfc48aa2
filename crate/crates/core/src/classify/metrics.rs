use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotation::Label;
use crate::error::{Error, Result};
use crate::table::align;

/// Binary confusion counts with "positive" sentiment as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        let mut m = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(predicted) {
            m.record(*t, *p);
        }
        m
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Negative, Label::Positive) => self.fp += 1,
            (Label::Positive, Label::Negative) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }

    /// Two-by-two table with predicted classes as rows and true classes as columns.
    pub fn render_text(&self, title: &str) -> String {
        let rows = vec![
            vec!["Pred. / Real".to_string(), "P".into(), "N".into()],
            vec!["P".to_string(), self.tp.to_string(), self.fp.to_string()],
            vec!["N".to_string(), self.fn_.to_string(), self.tn.to_string()],
        ];
        format!("{title}\n{}", align(&rows))
    }

    pub fn to_csv(&self) -> String {
        format!(
            "predicted,real_positive,real_negative\npositive,{},{}\nnegative,{},{}\n",
            self.tp, self.fp, self.fn_, self.tn
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().skip(1);
        let mut row = |name: &str| -> Result<(u64, u64)> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Schema(format!("confusion matrix missing {name} row")))?;
            let cells: Vec<&str> = line.split(',').collect();
            match cells.as_slice() {
                [n, a, b] if *n == name => Ok((
                    a.trim()
                        .parse()
                        .map_err(|_| Error::Schema(format!("bad count {a:?}")))?,
                    b.trim()
                        .parse()
                        .map_err(|_| Error::Schema(format!("bad count {b:?}")))?,
                )),
                _ => Err(Error::Schema(format!("malformed {name} row {line:?}"))),
            }
        };
        let (tp, fp) = row("positive")?;
        let (fn_, tn) = row("negative")?;
        Ok(ConfusionMatrix { tp, fp, fn_, tn })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Per-fold accuracies when the report comes from cross-validation.
    pub fold_accuracies: Vec<f64>,
}

impl EvalReport {
    pub fn mean_fold_accuracy(&self) -> Option<f64> {
        if self.fold_accuracies.is_empty() {
            None
        } else {
            Some(self.fold_accuracies.iter().sum::<f64>() / self.fold_accuracies.len() as f64)
        }
    }
}

/// Precision, recall, F1 and accuracy. Precision and recall are 0 when their
/// denominators are 0, and F1 is 0 when both are.
pub fn metrics(c: &ConfusionMatrix) -> Result<EvalReport> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Argument("confusion matrix is empty".into()));
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        precision,
        recall,
        f1,
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        fold_accuracies: Vec::new(),
    })
}

/// Classifier comparison table: one row per classifier with Precision, Recall,
/// F-Measure and CV accuracy (mean over folds, falling back to pooled accuracy).
pub fn render_comparison(title: &str, rows: &[(String, EvalReport)]) -> String {
    let mut table = vec![vec![
        title.to_string(),
        "Precision".into(),
        "Recall".into(),
        "F-Measure".into(),
        "CV / Accuracy".into(),
        "Pooled accuracy".into(),
    ]];
    for (name, r) in rows {
        table.push(vec![
            name.clone(),
            format!("{:.4}", r.precision),
            format!("{:.4}", r.recall),
            format!("{:.4}", r.f1),
            format!("{:.4}", r.mean_fold_accuracy().unwrap_or(r.accuracy)),
            format!("{:.4}", r.accuracy),
        ]);
    }
    align(&table)
}

pub fn comparison_csv(rows: &[(String, EvalReport)]) -> String {
    let mut out = String::from(
        "classifier,precision,recall,f1,cv_accuracy,pooled_accuracy,fold_accuracies\n",
    );
    for (name, r) in rows {
        let folds: Vec<String> = r.fold_accuracies.iter().map(|a| format!("{a}")).collect();
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{}",
            r.precision,
            r.recall,
            r.f1,
            r.mean_fold_accuracy().unwrap_or(r.accuracy),
            r.accuracy,
            folds.join(";")
        );
    }
    out
}
