//! Bivariate Granger causality F-tests and the sentiment × market sweep.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{change_series, ChangeKind, MarketSeries};
use crate::table::{align, csv_field};

use super::adf::{adf_test, AdfResult};
use super::correlation::check_lags;
use super::ols::{Matrix, Qr};
use super::sentiment::{SentimentKind, SentimentSeries};
use super::special::f_sf;

/// Floor applied to the unrestricted RSS before it is used as a divisor.
pub const RSS_FLOOR: f64 = 1e-12;

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    XToY,
    YToX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub direction: Direction,
    pub lag: usize,
    pub f_statistic: f64,
    pub p: f64,
    /// Observations in both regressions (`|x| - lag`).
    pub n_obs: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

fn one_direction(
    cause: &[f64],
    effect: &[f64],
    lag: usize,
    direction: Direction,
) -> Result<GrangerResult> {
    let n = effect.len();
    let rows = lag..n;
    let mut cols = vec![vec![1.0; n - lag]];
    for l in 1..=lag {
        cols.push(rows.clone().map(|t| effect[t - l]).collect());
    }
    for l in 1..=lag {
        cols.push(rows.clone().map(|t| cause[t - l]).collect());
    }
    let y: Vec<f64> = rows.map(|t| effect[t]).collect();
    let name = match direction {
        Direction::XToY => "x -> y",
        Direction::YToX => "y -> x",
    };
    let qr = Qr::new(&Matrix::from_columns(&cols)?, &y)
        .map_err(|e| Error::Numeric(format!("Granger regression {name} at lag {lag}: {e}")))?;
    // restricted = the leading 1 + lag columns of the unrestricted design
    let rss_r = qr.rss(1 + lag);
    let rss_u = qr.rss(1 + 2 * lag);
    let t = y.len();
    let df_den = (t - 2 * lag - 1) as f64;
    let f = (((rss_r - rss_u) / lag as f64) / (rss_u.max(RSS_FLOOR) / df_den)).max(0.0);
    Ok(GrangerResult {
        direction,
        lag,
        f_statistic: f,
        p: f_sf(f, lag as f64, df_den)?,
        n_obs: t,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
    })
}

/// Tests `x → y` (does the past of `x` help predict `y`) and `y → x` at lag `lag`.
pub fn granger_test(x: &[f64], y: &[f64], lag: usize) -> Result<(GrangerResult, GrangerResult)> {
    check_lags(&[lag])?;
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let t = x.len().saturating_sub(lag);
    if t < 2 * lag + 2 {
        return Err(Error::Argument(format!(
            "{} observations are too few for lag {lag}",
            x.len()
        )));
    }
    for (name, s) in [("x", x), ("y", y)] {
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{name} contains non-finite values")));
        }
        if s.iter().all(|&v| v == s[0]) {
            return Err(Error::Numeric(format!("{name} is constant")));
        }
    }
    Ok((
        one_direction(x, y, lag, Direction::XToY)?,
        one_direction(y, x, lag, Direction::YToX)?,
    ))
}

/// Summary symbol: `→` when only `x → y` is significant, `←` when only `y → x`
/// is, `↔` when both are and blank otherwise.
pub fn arrow(x_to_y_p: f64, y_to_x_p: f64, alpha: f64) -> &'static str {
    match (x_to_y_p < alpha, y_to_x_p < alpha) {
        (true, true) => "↔",
        (true, false) => "→",
        (false, true) => "←",
        (false, false) => "",
    }
}

/// One-day market changes indexed by the day the change ends on, so that the
/// value at `t` is known only at `t` and a lag-`L` regression uses changes
/// completed on or before `t - L`.
pub fn end_dated_changes(m: &MarketSeries, kind: ChangeKind) -> Result<Vec<(NaiveDate, f64)>> {
    let c = change_series(m, 1, kind)?;
    Ok(c.dates
        .iter()
        .zip(&c.values)
        .map(|(d, v)| (*d + chrono::Duration::days(1), *v))
        .collect())
}

/// Aligns a sentiment series with an end-dated change series on their common
/// dates, which must form one unbroken run of days.
pub fn align_for_granger(
    sentiment: &[f64],
    dates: &[NaiveDate],
    changes: &[(NaiveDate, f64)],
) -> Result<(Vec<NaiveDate>, Vec<f64>, Vec<f64>)> {
    let lookup: std::collections::HashMap<NaiveDate, f64> = changes.iter().copied().collect();
    let mut out: (Vec<NaiveDate>, Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new(), Vec::new());
    for (d, s) in dates.iter().zip(sentiment) {
        if let Some(c) = lookup.get(d) {
            if let Some(prev) = out.0.last() {
                if (*d - *prev).num_days() != 1 {
                    return Err(Error::Range(format!(
                        "sentiment and market dates are not contiguous between {prev} and {d}"
                    )));
                }
            }
            out.0.push(*d);
            out.1.push(*s);
            out.2.push(*c);
        }
    }
    Ok(out)
}

pub fn series_name(kind: SentimentKind) -> &'static str {
    match kind {
        SentimentKind::Positive => "POSITIVESENT",
        SentimentKind::Negative => "NEGATIVESENT",
        SentimentKind::Cumulative => "CUMULATIVESENT",
    }
}

pub fn metric_name(kind: ChangeKind) -> &'static str {
    match kind {
        ChangeKind::PctPrice => "PERCCHANGEAVG",
        ChangeKind::PctVolume => "PERCCHANGEVOLUME",
        ChangeKind::AbsPrice => "ABSCHANGEAVG",
        ChangeKind::AbsVolume => "ABSVOLUMECHANGE",
    }
}

/// Null hypothesis label and `(F, p)` per lag.
type HypothesisRow = (String, Vec<Option<(f64, f64)>>);

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerCell {
    pub sentiment: SentimentKind,
    pub metric: ChangeKind,
    pub lag: usize,
    /// `(x → y, y → x)` with x the sentiment and y the market metric.
    pub result: std::result::Result<(GrangerResult, GrangerResult), String>,
}

impl GrangerCell {
    pub fn arrow(&self) -> &'static str {
        match &self.result {
            Ok((xy, yx)) => arrow(xy.p, yx.p, SIGNIFICANCE),
            Err(_) => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityCheck {
    pub series: String,
    pub result: std::result::Result<AdfResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerSweep {
    pub source: String,
    pub metrics: Vec<ChangeKind>,
    pub lags: Vec<usize>,
    pub cells: Vec<GrangerCell>,
    pub stationarity: Vec<StationarityCheck>,
}

/// Runs both Granger directions for every sentiment kind × metric × lag on the
/// common dates of the sentiment series and the one-day change series. Each
/// input series is ADF-tested first; non-stationary ones are logged, not dropped.
pub fn granger_sweep(
    s: &SentimentSeries,
    m: &MarketSeries,
    metrics: &[ChangeKind],
    lags: &[usize],
) -> Result<GrangerSweep> {
    check_lags(lags)?;
    let dates = s.dates();
    let mut stationarity = Vec::new();
    let mut cells = Vec::new();
    let mut checked_sentiment = false;
    for &metric in metrics {
        let changes = end_dated_changes(m, metric)?;
        let mut checked_metric = false;
        for sentiment in SentimentKind::ALL {
            let aligned = align_for_granger(&s.values(sentiment), &dates, &changes);
            if let Ok((_, xs, ys)) = &aligned {
                if !checked_sentiment {
                    stationarity.push(check(series_name(sentiment), xs));
                }
                if !checked_metric {
                    stationarity.push(check(metric_name(metric), ys));
                    checked_metric = true;
                }
            }
            for &lag in lags {
                let result = match &aligned {
                    Ok((_, xs, ys)) => granger_test(xs, ys, lag).map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                };
                cells.push(GrangerCell {
                    sentiment,
                    metric,
                    lag,
                    result,
                });
            }
        }
        checked_sentiment = true;
    }
    Ok(GrangerSweep {
        source: s.channel().display_name().to_string(),
        metrics: metrics.to_vec(),
        lags: lags.to_vec(),
        cells,
        stationarity,
    })
}

fn check(name: &str, values: &[f64]) -> StationarityCheck {
    let result = adf_test(values, None).map_err(|e| e.to_string());
    match &result {
        Ok(r) if !r.stationary_at_5pct => {
            log::warn!(
                "{name} is not stationary at 5% (ADF p {}); testing anyway",
                r.p_display()
            )
        }
        Err(e) => log::warn!("ADF on {name} failed: {e}"),
        _ => {}
    }
    StationarityCheck {
        series: name.to_string(),
        result,
    }
}

impl GrangerSweep {
    pub fn get(
        &self,
        sentiment: SentimentKind,
        metric: ChangeKind,
        lag: usize,
    ) -> Option<&GrangerCell> {
        self.cells
            .iter()
            .find(|c| c.sentiment == sentiment && c.metric == metric && c.lag == lag)
    }

    fn grid_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for &metric in &self.metrics {
            for sentiment in [
                SentimentKind::Negative,
                SentimentKind::Positive,
                SentimentKind::Cumulative,
            ] {
                let mut row = vec![
                    format!("{} {}", sentiment.display_name(), self.source),
                    capitalised(metric.display_name()),
                ];
                for &lag in &self.lags {
                    row.push(
                        self.get(sentiment, metric, lag)
                            .map_or("", |c| c.arrow())
                            .to_string(),
                    );
                }
                rows.push(row);
            }
        }
        rows
    }

    /// Direction grid: rows are (sentiment, metric) pairs, columns are lags.
    pub fn arrow_grid_text(&self) -> String {
        let mut rows = vec![["x".to_string(), "y".to_string()]
            .into_iter()
            .chain(self.lags.iter().map(|l| format!("Lag {l}")))
            .collect::<Vec<_>>()];
        rows.extend(self.grid_rows());
        align(&rows)
    }

    pub fn arrow_grid_csv(&self) -> String {
        let mut out = String::from("x,y");
        for l in &self.lags {
            let _ = write!(out, ",lag_{l}");
        }
        out.push('\n');
        for row in self.grid_rows() {
            let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn hypothesis_rows(&self) -> Vec<HypothesisRow> {
        let mut rows = Vec::new();
        for &metric in &self.metrics {
            for sentiment in [
                SentimentKind::Cumulative,
                SentimentKind::Negative,
                SentimentKind::Positive,
            ] {
                let (x, y) = (series_name(sentiment), metric_name(metric));
                for (dir, label) in [
                    (Direction::XToY, format!("{x} does not Granger Cause {y}")),
                    (Direction::YToX, format!("{y} does not Granger Cause {x}")),
                ] {
                    let cells = self
                        .lags
                        .iter()
                        .map(|&lag| {
                            self.get(sentiment, metric, lag)
                                .and_then(|c| c.result.as_ref().ok())
                                .map(|(a, b)| {
                                    let r = if dir == Direction::XToY { a } else { b };
                                    (r.f_statistic, r.p)
                                })
                        })
                        .collect();
                    rows.push((label, cells));
                }
            }
        }
        rows
    }

    /// Full F-statistic / probability table, two rows per hypothesis pair.
    pub fn f_table_text(&self) -> String {
        let mut head = vec![self.source.clone()];
        let mut sub = vec!["Null Hypothesis:".to_string()];
        for l in &self.lags {
            head.extend([format!("Lag: {l}"), String::new()]);
            sub.extend(["F-Statistic".to_string(), "Prob.".to_string()]);
        }
        let mut rows = vec![head, sub];
        for (i, (label, cells)) in self.hypothesis_rows().into_iter().enumerate() {
            if i > 0 && i % 2 == 0 {
                rows.push(Vec::new());
            }
            let mut row = vec![label];
            for c in cells {
                match c {
                    Some((f, p)) => row.extend([format!("{f:.5}"), format!("{p:.4}")]),
                    None => row.extend(["n/a".to_string(), "n/a".to_string()]),
                }
            }
            rows.push(row);
        }
        align(&rows)
    }

    pub fn f_table_csv(&self) -> String {
        let mut out = String::from("source,null_hypothesis,lag,f_statistic,p,n_obs,note\n");
        for &metric in &self.metrics {
            for sentiment in [
                SentimentKind::Cumulative,
                SentimentKind::Negative,
                SentimentKind::Positive,
            ] {
                let (x, y) = (series_name(sentiment), metric_name(metric));
                for &lag in &self.lags {
                    let Some(cell) = self.get(sentiment, metric, lag) else {
                        continue;
                    };
                    match &cell.result {
                        Ok((xy, yx)) => {
                            for (r, label) in [
                                (xy, format!("{x} does not Granger Cause {y}")),
                                (yx, format!("{y} does not Granger Cause {x}")),
                            ] {
                                let _ = writeln!(
                                    out,
                                    "{},{label},{lag},{},{},{},",
                                    csv_field(&self.source),
                                    r.f_statistic,
                                    r.p,
                                    r.n_obs
                                );
                            }
                        }
                        Err(e) => {
                            let _ = writeln!(
                                out,
                                "{},{x} does not Granger Cause {y},{lag},,,,{}",
                                csv_field(&self.source),
                                csv_field(e)
                            );
                        }
                    }
                }
            }
        }
        out
    }

    pub fn stationarity_csv(&self) -> String {
        let mut out = String::from(
            "source,series,statistic,p,p_bound,lags_used,n_obs,stationary_at_5pct,note\n",
        );
        for c in &self.stationarity {
            let _ = match &c.result {
                Ok(r) => writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},",
                    csv_field(&self.source),
                    c.series,
                    r.statistic,
                    r.p,
                    match r.p_bound {
                        Some(super::adf::PBound::Below) => "below",
                        Some(super::adf::PBound::Above) => "above",
                        None => "",
                    },
                    r.lags_used,
                    r.n_obs,
                    r.stationary_at_5pct
                ),
                Err(e) => writeln!(
                    out,
                    "{},{},,,,,,,{}",
                    csv_field(&self.source),
                    c.series,
                    csv_field(e)
                ),
            };
        }
        out
    }
}

fn capitalised(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
