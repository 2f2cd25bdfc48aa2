//! Daily exchange data and the t → t+n price and volume changes that sentiment is
//! correlated against.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::corpus::parse_date;
use crate::error::{Error, Result};

/// Largest horizon `n` for which changes are computed.
pub const MAX_HORIZON: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketRow {
    pub date: NaiveDate,
    pub average: f64,
    pub volume: f64,
    pub ask: Option<f64>,
    pub bid: Option<f64>,
    pub last: Option<f64>,
}

/// Daily market data sorted by date. Unless built with `allow_gaps`, every
/// calendar day between the first and last date is present.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    rows: Vec<MarketRow>,
    index: HashMap<NaiveDate, usize>,
    gap_free: bool,
}

impl MarketSeries {
    pub fn new(mut rows: Vec<MarketRow>, allow_gaps: bool) -> Result<Self> {
        rows.sort_by_key(|r| r.date);
        for r in &rows {
            let prices = [Some(r.average), r.ask, r.bid, r.last];
            if prices
                .iter()
                .flatten()
                .any(|p| !(p.is_finite() && *p > 0.0))
            {
                return Err(Error::Validation(format!(
                    "{}: prices must be positive",
                    r.date
                )));
            }
            if !(r.volume.is_finite() && r.volume >= 0.0) {
                return Err(Error::Validation(format!(
                    "{}: volume must be non-negative",
                    r.date
                )));
            }
        }
        let mut gaps = 0;
        for pair in rows.windows(2) {
            let step = (pair[1].date - pair[0].date).num_days();
            if step == 0 {
                return Err(Error::Validation(format!(
                    "duplicate date {}",
                    pair[0].date
                )));
            }
            if step > 1 {
                if !allow_gaps {
                    return Err(Error::Validation(format!(
                        "market data has no rows between {} and {} (use allow_gaps to accept gaps)",
                        pair[0].date, pair[1].date
                    )));
                }
                gaps += 1;
            }
        }
        if gaps > 0 {
            log::warn!("market data has {gaps} gap(s); changes spanning them are skipped");
        }
        let index = rows.iter().enumerate().map(|(i, r)| (r.date, i)).collect();
        Ok(MarketSeries {
            rows,
            index,
            gap_free: gaps == 0,
        })
    }

    pub fn rows(&self) -> &[MarketRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_gap_free(&self) -> bool {
        self.gap_free
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.rows.iter().map(|r| r.date)
    }

    pub fn get(&self, date: NaiveDate) -> Option<&MarketRow> {
        self.index.get(&date).map(|&i| &self.rows[i])
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rows.first().map(|r| r.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.rows.last().map(|r| r.date)
    }
}

pub fn load_market_csv(path: impl AsRef<Path>, allow_gaps: bool) -> Result<MarketSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_market_csv(file, path, allow_gaps)
}

/// Parses a CSV with `Date`, `Average` and `Volume` columns (header names are
/// matched case-insensitively) and optional `Ask`, `Bid`, `Last`.
pub fn read_market_csv(
    reader: impl std::io::Read,
    origin: &Path,
    allow_gaps: bool,
) -> Result<MarketSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::csv(origin, e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let require = |name: &str| {
        column(name).ok_or_else(|| {
            Error::Schema(format!(
                "{}: missing required column {name}",
                origin.display()
            ))
        })
    };
    let (date_col, avg_col, vol_col) = (require("Date")?, require("Average")?, require("Volume")?);
    let (ask_col, bid_col, last_col) = (column("Ask"), column("Bid"), column("Last"));

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::csv(origin, e))?;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let number = |c: usize, name: &str| -> Result<f64> {
            cell(c).parse().map_err(|_| {
                Error::parse(
                    origin,
                    line,
                    format!("{name} {:?} is not a number", cell(c)),
                )
            })
        };
        let optional = |c: Option<usize>, name: &str| -> Result<Option<f64>> {
            match c {
                Some(c) if !cell(c).is_empty() => number(c, name).map(Some),
                _ => Ok(None),
            }
        };
        let date = parse_date(cell(date_col))
            .ok_or_else(|| Error::parse(origin, line, format!("bad date {:?}", cell(date_col))))?;
        rows.push(MarketRow {
            date,
            average: number(avg_col, "Average")?,
            volume: number(vol_col, "Volume")?,
            ask: optional(ask_col, "Ask")?,
            bid: optional(bid_col, "Bid")?,
            last: optional(last_col, "Last")?,
        });
    }
    MarketSeries::new(rows, allow_gaps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    PctPrice,
    PctVolume,
    AbsPrice,
    AbsVolume,
}

impl ChangeKind {
    /// Column order of the correlation tables.
    pub const ALL: [ChangeKind; 4] = [
        ChangeKind::PctPrice,
        ChangeKind::PctVolume,
        ChangeKind::AbsPrice,
        ChangeKind::AbsVolume,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::PctPrice => "pct_price",
            ChangeKind::AbsPrice => "abs_price",
            ChangeKind::PctVolume => "pct_volume",
            ChangeKind::AbsVolume => "abs_volume",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ChangeKind::PctPrice => "% price change",
            ChangeKind::AbsPrice => "abs price change",
            ChangeKind::PctVolume => "% volume change",
            ChangeKind::AbsVolume => "abs volume change",
        }
    }

    pub fn is_percentage(self) -> bool {
        matches!(self, ChangeKind::PctPrice | ChangeKind::PctVolume)
    }

    fn value(self, row: &MarketRow) -> f64 {
        match self {
            ChangeKind::PctPrice | ChangeKind::AbsPrice => row.average,
            ChangeKind::PctVolume | ChangeKind::AbsVolume => row.volume,
        }
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChangeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChangeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown change kind {s:?}")))
    }
}

fn check_horizon(n: usize) -> Result<()> {
    if (1..=MAX_HORIZON).contains(&n) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "horizon must be in 1..={MAX_HORIZON}, got {n}"
        )))
    }
}

/// Change from day `t` to day `t + n`: `100 (v[t+n] - v[t]) / v[t]` for
/// percentage kinds, `v[t+n] - v[t]` for absolute ones.
pub fn change(series: &MarketSeries, t: NaiveDate, n: usize, kind: ChangeKind) -> Result<f64> {
    check_horizon(n)?;
    let end = t
        .checked_add_days(Days::new(n as u64))
        .ok_or_else(|| Error::Range(format!("{t} + {n} days overflows")))?;
    let (Some(a), Some(b)) = (series.get(t), series.get(end)) else {
        return Err(Error::Range(format!(
            "no market data for both {t} and {end}"
        )));
    };
    let (va, vb) = (kind.value(a), kind.value(b));
    if kind.is_percentage() {
        if va == 0.0 {
            return Err(Error::Range(format!(
                "{kind} undefined on {t}: base value is zero"
            )));
        }
        Ok(100.0 * (vb - va) / va)
    } else {
        Ok(vb - va)
    }
}

/// Change values keyed by their base date `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeSeries {
    pub horizon: usize,
    pub kind: ChangeKind,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// Base dates skipped because a percentage change had a zero base.
    pub dropped: usize,
}

impl ChangeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,value\n");
        for (d, v) in self.dates.iter().zip(&self.values) {
            let _ = writeln!(out, "{d},{v}");
        }
        out
    }
}

/// `change(series, t, n, kind)` for every `t` whose `t + n` is present.
pub fn change_series(series: &MarketSeries, n: usize, kind: ChangeKind) -> Result<ChangeSeries> {
    check_horizon(n)?;
    let mut out = ChangeSeries {
        horizon: n,
        kind,
        dates: Vec::new(),
        values: Vec::new(),
        dropped: 0,
    };
    for row in series.rows() {
        match change(series, row.date, n, kind) {
            Ok(v) => {
                out.dates.push(row.date);
                out.values.push(v);
            }
            Err(Error::Range(_)) => {
                let end = row.date.checked_add_days(Days::new(n as u64));
                if end.is_some_and(|e| series.get(e).is_some()) {
                    out.dropped += 1;
                }
            }
            Err(e) => return Err(e),
        }
    }
    if out.dropped > 0 {
        log::warn!(
            "{kind} at horizon {n}: dropped {} day(s) with a zero base",
            out.dropped
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day(i: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + chrono::Duration::days(i)
    }

    fn series(prices: &[f64], volumes: &[f64]) -> MarketSeries {
        let rows = prices
            .iter()
            .zip(volumes)
            .enumerate()
            .map(|(i, (&p, &v))| MarketRow {
                date: day(i as i64),
                average: p,
                volume: v,
                ask: None,
                bid: None,
                last: None,
            })
            .collect();
        MarketSeries::new(rows, false).unwrap()
    }

    #[test]
    fn loads_csv() {
        let text = "Date,Average,Ask,Bid,Last,Volume\n2015-01-02,101,,,,5\n2015-01-01,100,100.5,99.5,100,4\n";
        let s = read_market_csv(text.as_bytes(), Path::new("m.csv"), false).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.rows()[0].date, day(0));
        assert_eq!(s.rows()[0].ask, Some(100.5));
        assert_eq!(s.rows()[1].ask, None);
    }

    #[test]
    fn load_errors() {
        let p = Path::new("m.csv");
        let e = read_market_csv("Date,Average\n2015-01-01,1\n".as_bytes(), p, false).unwrap_err();
        assert!(matches!(&e, Error::Schema(m) if m.contains("Volume")));
        let dup = "Date,Average,Volume\n2015-03-01,1,1\n2015-03-01,2,1\n";
        assert!(matches!(
            read_market_csv(dup.as_bytes(), p, false),
            Err(Error::Validation(_))
        ));
        let neg = "Date,Average,Volume\n2015-03-01,0,1\n";
        assert!(matches!(
            read_market_csv(neg.as_bytes(), p, false),
            Err(Error::Validation(_))
        ));
        let gap = "Date,Average,Volume\n2015-03-01,1,1\n2015-03-03,2,1\n";
        assert!(matches!(
            read_market_csv(gap.as_bytes(), p, false),
            Err(Error::Validation(_))
        ));
        let s = read_market_csv(gap.as_bytes(), p, true).unwrap();
        assert!(!s.is_gap_free());
        assert_eq!(change_series(&s, 1, ChangeKind::AbsPrice).unwrap().len(), 0);
        assert_eq!(
            change_series(&s, 2, ChangeKind::AbsPrice).unwrap().values,
            vec![1.0]
        );
        let bad = "Date,Average,Volume\n2015-03-01,x,1\n";
        assert!(matches!(
            read_market_csv(bad.as_bytes(), p, false),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn full_year_length() {
        let s = series(&vec![10.0; 365], &vec![1.0; 365]);
        assert_eq!(s.len(), 365);
        assert_eq!(s.last_date(), NaiveDate::from_ymd_opt(2015, 12, 31));
    }

    #[test]
    fn change_examples() {
        let s = series(&[100.0, 110.0, 110.0], &[0.0, 5.0, 5.0]);
        assert_eq!(change(&s, day(0), 1, ChangeKind::PctPrice).unwrap(), 10.0);
        assert_eq!(change(&s, day(0), 1, ChangeKind::AbsPrice).unwrap(), 10.0);
        assert_eq!(change(&s, day(1), 1, ChangeKind::PctPrice).unwrap(), 0.0);
        assert_eq!(change(&s, day(1), 1, ChangeKind::AbsVolume).unwrap(), 0.0);
        assert!(matches!(
            change(&s, day(0), 1, ChangeKind::PctVolume),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            change(&s, day(2), 1, ChangeKind::PctPrice),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            change(&s, day(0), 6, ChangeKind::PctPrice),
            Err(Error::Argument(_))
        ));
        let pv = change_series(&s, 1, ChangeKind::PctVolume).unwrap();
        assert_eq!((pv.len(), pv.dropped), (1, 1));
    }

    #[test]
    fn change_series_examples() {
        let s = series(&[7.0; 10], &[3.0; 10]);
        for n in 1..=5 {
            for kind in ChangeKind::ALL {
                let c = change_series(&s, n, kind).unwrap();
                assert_eq!(c.len(), 10 - n);
                assert!(c.values.iter().all(|&v| v == 0.0));
            }
        }
        let linear: Vec<f64> = (1..=10).map(f64::from).collect();
        let s = series(&linear, &linear);
        assert!(change_series(&s, 1, ChangeKind::AbsPrice)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 1.0));
        assert_eq!(
            change_series(&s, 5, ChangeKind::PctVolume).unwrap().len(),
            5
        );
        assert!(change_series(&s, 0, ChangeKind::PctVolume).is_err());
        let csv = change_series(&s, 4, ChangeKind::AbsPrice).unwrap().to_csv();
        assert!(csv.starts_with("date,value\n2015-01-01,4\n"));
    }

    proptest! {
        #[test]
        fn consistency_sign_agreement_and_shift(
            data in proptest::collection::vec((0.5f64..1000.0, 0.0f64..1e6), 6..40),
            n in 1usize..=5,
            offset in -2000i64..2000,
        ) {
            let (prices, volumes): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
            let s = series(&prices, &volumes);
            let shifted = MarketSeries::new(
                s.rows().iter().map(|r| MarketRow { date: r.date + chrono::Duration::days(offset), ..*r }).collect(),
                false,
            ).unwrap();
            for kind in ChangeKind::ALL {
                let c = change_series(&s, n, kind).unwrap();
                let moved = change_series(&shifted, n, kind).unwrap();
                prop_assert_eq!(&c.values, &moved.values);
                for (d, v) in c.dates.iter().zip(&c.values) {
                    prop_assert_eq!(change(&s, *d, n, kind).unwrap(), *v);
                }
            }
            for (pct, abs) in [(ChangeKind::PctPrice, ChangeKind::AbsPrice), (ChangeKind::PctVolume, ChangeKind::AbsVolume)] {
                let a = change_series(&s, n, abs).unwrap();
                let p = change_series(&s, n, pct).unwrap();
                for (d, v) in p.dates.iter().zip(&p.values) {
                    let av = a.get(*d).unwrap();
                    prop_assert_eq!(v.signum() == 0.0 || v.signum() == av.signum(), true);
                    prop_assert_eq!(*v == 0.0, av == 0.0);
                }
            }
        }
    }
}
