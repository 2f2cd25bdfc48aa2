//! Daily sentiment series and the statistics run on them: Pearson correlation,
//! percentile filtering, ADF stationarity and Granger causality.

mod adf;
mod correlation;
mod granger;
mod ols;
mod sentiment;
mod special;

pub use adf::{
    adf_test, critical_values, default_max_lags, interpolate_p, AdfResult, PBound, MIN_ADF_LENGTH,
};
pub use correlation::{
    format_cell, lagged_correlation, pearson, percentile, percentile_filter, CorrelationCell,
    CorrelationTable, Pearson,
};
pub use granger::{
    align_for_granger, arrow, end_dated_changes, granger_sweep, granger_test, metric_name,
    series_name, Direction, GrangerCell, GrangerResult, GrangerSweep, StationarityCheck, RSS_FLOOR,
    SIGNIFICANCE,
};
pub use ols::{ols, Matrix, OlsFit, Qr};
pub use sentiment::{daily_sentiment_series, sentiment_from_dates, SentimentKind, SentimentSeries};
pub use special::{
    beta_reg, dist_cdf, f_cdf, f_sf, ln_gamma, student_t_cdf, student_t_two_sided, Distribution,
};
