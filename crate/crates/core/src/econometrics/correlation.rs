use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{change_series, ChangeKind, MarketSeries, MAX_HORIZON};
use crate::table::{align, csv_field};

use super::sentiment::{SentimentKind, SentimentSeries};
use super::special::student_t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pearson {
    pub r: f64,
    /// Two-sided p-value of `t = r sqrt((n-2)/(1-r²))` under Student's t with `n - 2` df.
    pub p: f64,
    pub n: usize,
}

/// Sample Pearson correlation with its two-sided p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Pearson> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Range(format!(
            "need at least 3 paired points, got {n}"
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numeric(
            "degenerate variance: a series is constant".into(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        student_t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)?
    };
    Ok(Pearson { r, p, n })
}

/// Nearest-rank percentile: the smallest value with at least `pct`% of the data
/// at or below it.
pub fn percentile(values: &[f64], pct: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Argument("percentile of an empty series".into()));
    }
    if !(0.0..=100.0).contains(&pct) {
        return Err(Error::Argument(format!("percentile {pct} outside 0..=100")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

/// Days whose positive count is strictly above the `hi` percentile of positive
/// counts and whose negative count is strictly below the `lo` percentile of
/// negative counts.
pub fn percentile_filter(s: &SentimentSeries, hi: f64, lo: f64) -> Result<BTreeSet<NaiveDate>> {
    let pos = s.values(SentimentKind::Positive);
    let neg = s.values(SentimentKind::Negative);
    let (p_hi, n_lo) = (percentile(&pos, hi)?, percentile(&neg, lo)?);
    Ok(s.dates()
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| pos[i] > p_hi && neg[i] < n_lo)
        .map(|(_, d)| d)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCell {
    pub sentiment: SentimentKind,
    pub metric: ChangeKind,
    pub lag: usize,
    pub result: std::result::Result<Pearson, String>,
}

/// Correlations of sentiment at `t` with market changes from `t` to `t + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub source: String,
    pub lags: Vec<usize>,
    pub cells: Vec<CorrelationCell>,
}

pub(crate) fn check_lags(lags: &[usize]) -> Result<()> {
    if lags.is_empty() {
        return Err(Error::Argument("no lags requested".into()));
    }
    if let Some(l) = lags.iter().find(|l| !(1..=MAX_HORIZON).contains(*l)) {
        return Err(Error::Argument(format!(
            "lag {l} outside 1..={MAX_HORIZON}"
        )));
    }
    Ok(())
}

/// Pairs `S_t` with `change(t, t + n)` on the dates both exist (and, when
/// `mask` is given, on masked dates only) for every sentiment kind, metric and
/// lag. Cells without enough data are kept with the reason they are undefined.
pub fn lagged_correlation(
    s: &SentimentSeries,
    m: &MarketSeries,
    lags: &[usize],
    mask: Option<&BTreeSet<NaiveDate>>,
) -> Result<CorrelationTable> {
    check_lags(lags)?;
    let dates = s.dates();
    let mut cells = Vec::new();
    for sentiment in SentimentKind::ALL {
        let values = s.values(sentiment);
        for metric in ChangeKind::ALL {
            for &lag in lags {
                let changes = change_series(m, lag, metric)?;
                let (mut xs, mut ys) = (Vec::new(), Vec::new());
                for (d, v) in dates.iter().zip(&values) {
                    if mask.is_some_and(|mask| !mask.contains(d)) {
                        continue;
                    }
                    if let Some(c) = changes.get(*d) {
                        xs.push(*v);
                        ys.push(c);
                    }
                }
                let result = pearson(&xs, &ys).map_err(|e| e.to_string());
                cells.push(CorrelationCell {
                    sentiment,
                    metric,
                    lag,
                    result,
                });
            }
        }
    }
    Ok(CorrelationTable {
        source: s.channel().display_name().to_string(),
        lags: lags.to_vec(),
        cells,
    })
}

impl CorrelationTable {
    pub fn get(
        &self,
        sentiment: SentimentKind,
        metric: ChangeKind,
        lag: usize,
    ) -> Option<&CorrelationCell> {
        self.cells
            .iter()
            .find(|c| c.sentiment == sentiment && c.metric == metric && c.lag == lag)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,sentiment,metric,lag,n,r,p,note\n");
        for c in &self.cells {
            let _ = match &c.result {
                Ok(p) => writeln!(
                    out,
                    "{},{},{},{},{},{},{},",
                    csv_field(&self.source),
                    c.sentiment,
                    c.metric,
                    c.lag,
                    p.n,
                    p.r,
                    p.p
                ),
                Err(e) => writeln!(
                    out,
                    "{},{},{},{},,,,{}",
                    csv_field(&self.source),
                    c.sentiment,
                    c.metric,
                    c.lag,
                    csv_field(e)
                ),
            };
        }
        out
    }

    /// One block per sentiment kind: rows are metrics, columns are lags and
    /// cells read `r = …, p = …`.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (i, sentiment) in SentimentKind::ALL.into_iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(
                out,
                "Correlation of {} sentiment at t with metric at t+n",
                sentiment.as_str()
            );
            let mut rows = vec![["Source".to_string(), "Metric".to_string()]
                .into_iter()
                .chain(self.lags.iter().map(|l| format!("t + {l}")))
                .collect::<Vec<_>>()];
            for metric in ChangeKind::ALL {
                let mut row = vec![self.source.clone(), metric.display_name().to_string()];
                for &lag in &self.lags {
                    row.push(match self.get(sentiment, metric, lag).map(|c| &c.result) {
                        Some(Ok(p)) => format_cell(p),
                        _ => "undefined".to_string(),
                    });
                }
                rows.push(row);
            }
            out.push_str(&align(&rows));
        }
        out
    }
}

pub fn format_cell(p: &Pearson) -> String {
    format!("r = {:.4}, p = {:.4}", p.r, p.p)
}
