//! Augmented Dickey-Fuller unit-root test with a constant and no trend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ols::{fit_prefix, Matrix, Qr};

/// Response-surface coefficients `(β∞, β1, β2, β3)` for the constant-only
/// critical values `c(T) = β∞ + β1/T + β2/T² + β3/T³` at 1%, 5% and 10%.
const CRITICAL_SURFACE: [(f64, [f64; 4]); 3] = [
    (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
];

pub const MIN_ADF_LENGTH: usize = 20;

/// Which side of the tabulated range the statistic fell on, if outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PBound {
    /// Statistic below the 1% critical value; the true p is at most 0.01.
    Below,
    /// Statistic above the 10% critical value; the true p is at least 0.10.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio of the lagged level coefficient.
    pub statistic: f64,
    /// Approximate p-value interpolated between the 1%, 5% and 10% critical values.
    pub p: f64,
    pub p_bound: Option<PBound>,
    pub lags_used: usize,
    pub n_obs: usize,
    /// Critical values at 1%, 5% and 10% for `n_obs`.
    pub critical_values: [f64; 3],
    pub stationary_at_5pct: bool,
}

/// Critical values at 1%, 5% and 10% for a regression on `n` observations.
pub fn critical_values(n: usize) -> [f64; 3] {
    let t = n as f64;
    CRITICAL_SURFACE.map(|(_, b)| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t))
}

/// Piecewise-linear p-value through `(cv1, 0.01)`, `(cv5, 0.05)`, `(cv10, 0.10)`,
/// clamped to `[0.01, 0.10]` outside that range.
pub fn interpolate_p(statistic: f64, cv: [f64; 3]) -> (f64, Option<PBound>) {
    let levels = CRITICAL_SURFACE.map(|(l, _)| l);
    if statistic <= cv[0] {
        return (levels[0], Some(PBound::Below));
    }
    if statistic >= cv[2] {
        return (levels[2], Some(PBound::Above));
    }
    let i = if statistic <= cv[1] { 0 } else { 1 };
    let frac = (statistic - cv[i]) / (cv[i + 1] - cv[i]);
    (levels[i] + frac * (levels[i + 1] - levels[i]), None)
}

/// `⌊12 (T/100)^{1/4}⌋`.
pub fn default_max_lags(t: usize) -> usize {
    (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Regression rows `Δx_i ~ 1 + x_i + Δx_{i-1} + … + Δx_{i-p}` for `i` in `p..`.
fn design(x: &[f64], dx: &[f64], p: usize, first: usize) -> Result<(Matrix, Vec<f64>)> {
    let rows: Vec<usize> = (first..dx.len()).collect();
    let mut cols = vec![vec![1.0; rows.len()], rows.iter().map(|&i| x[i]).collect()];
    for lag in 1..=p {
        cols.push(rows.iter().map(|&i| dx[i - lag]).collect());
    }
    let y = rows.iter().map(|&i| dx[i]).collect();
    Ok((Matrix::from_columns(&cols)?, y))
}

/// Lag order is chosen by minimum AIC over `0..=max_lags` on a common sample,
/// then the chosen regression is refitted on all available observations.
pub fn adf_test(x: &[f64], max_lags: Option<usize>) -> Result<AdfResult> {
    let t = x.len();
    if t < MIN_ADF_LENGTH {
        return Err(Error::Argument(format!(
            "ADF needs at least {MIN_ADF_LENGTH} observations, got {t}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("series contains non-finite values".into()));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::Numeric(
            "ADF on a constant series is degenerate".into(),
        ));
    }
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // keep at least half the differenced sample for estimation
    let cap = (dx.len() / 2).saturating_sub(3);
    let max_lags = max_lags.unwrap_or_else(|| default_max_lags(t)).min(cap);

    let (m, y) = design(x, &dx, max_lags, max_lags)?;
    let qr = Qr::new(&m, &y)?;
    let n = y.len() as f64;
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_lags {
        let k = 2 + p;
        let aic = n * (qr.rss(k) / n).ln() + 2.0 * k as f64;
        if aic < best.0 {
            best = (aic, p);
        }
    }
    let lags_used = best.1;

    let (m, y) = design(x, &dx, lags_used, lags_used)?;
    let qr = Qr::new(&m, &y)?;
    let fit = fit_prefix(&qr, m.cols());
    let statistic = fit.coefficients[1] / fit.std_errors[1];
    if !statistic.is_finite() {
        return Err(Error::Numeric("ADF statistic is not finite".into()));
    }
    let cv = critical_values(y.len());
    let (p, p_bound) = interpolate_p(statistic, cv);
    Ok(AdfResult {
        statistic,
        p,
        p_bound,
        lags_used,
        n_obs: y.len(),
        critical_values: cv,
        stationary_at_5pct: p < 0.05,
    })
}

impl AdfResult {
    pub fn p_display(&self) -> String {
        match self.p_bound {
            Some(PBound::Below) => format!("<{:.2}", self.p),
            Some(PBound::Above) => format!(">{:.2}", self.p),
            None => format!("{:.4}", self.p),
        }
    }
}
