use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::annotation::Label;
use crate::corpus::{Channel, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentKind {
    Positive,
    Negative,
    Cumulative,
}

impl SentimentKind {
    pub const ALL: [SentimentKind; 3] = [
        SentimentKind::Positive,
        SentimentKind::Negative,
        SentimentKind::Cumulative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentKind::Positive => "positive",
            SentimentKind::Negative => "negative",
            SentimentKind::Cumulative => "cumulative",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            SentimentKind::Positive => "Positive",
            SentimentKind::Negative => "Negative",
            SentimentKind::Cumulative => "Cumulative",
        }
    }
}

impl fmt::Display for SentimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SentimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown sentiment kind {s:?}")))
    }
}

/// Daily counts of positive and negative documents over a gap-free date range,
/// with cumulative sentiment `C = P - N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentSeries {
    channel: Channel,
    start: Option<NaiveDate>,
    positive: Vec<u64>,
    negative: Vec<u64>,
    cumulative: Vec<i64>,
}

impl SentimentSeries {
    /// Series starting at `start` with one `(P, N)` pair per consecutive day.
    pub fn from_counts(channel: Channel, start: NaiveDate, counts: &[(u64, u64)]) -> Self {
        SentimentSeries {
            channel,
            start: (!counts.is_empty()).then_some(start),
            positive: counts.iter().map(|c| c.0).collect(),
            negative: counts.iter().map(|c| c.1).collect(),
            cumulative: counts.iter().map(|&(p, n)| p as i64 - n as i64).collect(),
        }
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn start(&self) -> Option<NaiveDate> {
        self.start
    }

    pub fn end(&self) -> Option<NaiveDate> {
        self.start
            .map(|s| s + chrono::Duration::days(self.len() as i64 - 1))
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        match self.start {
            Some(s) => (0..self.len())
                .map(|i| s + chrono::Duration::days(i as i64))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn positive(&self) -> &[u64] {
        &self.positive
    }

    pub fn negative(&self) -> &[u64] {
        &self.negative
    }

    pub fn cumulative(&self) -> &[i64] {
        &self.cumulative
    }

    pub fn values(&self, kind: SentimentKind) -> Vec<f64> {
        match kind {
            SentimentKind::Positive => self.positive.iter().map(|&v| v as f64).collect(),
            SentimentKind::Negative => self.negative.iter().map(|&v| v as f64).collect(),
            SentimentKind::Cumulative => self.cumulative.iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let i = (date - self.start?).num_days();
        (0..self.len() as i64).contains(&i).then_some(i as usize)
    }

    /// Re-spans the series to `start..=end`, zero-filling days without documents
    /// and dropping days outside the range.
    pub fn with_range(&self, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::Argument(format!(
                "range end {end} precedes start {start}"
            )));
        }
        let days = (end - start).num_days() as usize + 1;
        let counts: Vec<(u64, u64)> = (0..days)
            .map(|i| {
                let d = start + chrono::Duration::days(i as i64);
                self.index_of(d)
                    .map_or((0, 0), |j| (self.positive[j], self.negative[j]))
            })
            .collect();
        Ok(SentimentSeries::from_counts(self.channel, start, &counts))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,positive,negative,cumulative\n");
        for (i, d) in self.dates().iter().enumerate() {
            let _ = writeln!(
                out,
                "{d},{},{},{}",
                self.positive[i], self.negative[i], self.cumulative[i]
            );
        }
        out
    }
}

/// Counts labels per day over the span from the earliest to the latest date.
pub fn sentiment_from_dates(channel: Channel, labelled: &[(NaiveDate, Label)]) -> SentimentSeries {
    let mut by_day: BTreeMap<NaiveDate, (u64, u64)> = BTreeMap::new();
    for &(d, label) in labelled {
        let e = by_day.entry(d).or_default();
        match label {
            Label::Positive => e.0 += 1,
            Label::Negative => e.1 += 1,
        }
    }
    let (Some(&first), Some(&last)) = (by_day.keys().next(), by_day.keys().next_back()) else {
        return SentimentSeries::from_counts(channel, NaiveDate::MIN, &[]);
    };
    let days = (last - first).num_days() as usize + 1;
    let counts: Vec<(u64, u64)> = (0..days)
        .map(|i| {
            let d = first + chrono::Duration::days(i as i64);
            by_day.get(&d).copied().unwrap_or((0, 0))
        })
        .collect();
    SentimentSeries::from_counts(channel, first, &counts)
}

/// Daily sentiment series of classified documents, keyed by document date.
pub fn daily_sentiment_series(
    channel: Channel,
    classified: &[(Document, Label)],
) -> SentimentSeries {
    let dated: Vec<(NaiveDate, Label)> =
        classified.iter().map(|(d, l)| (d.timestamp, *l)).collect();
    sentiment_from_dates(channel, &dated)
}
