//! Daily index bars, the percent-change targets and the chronological split.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::series::TradingCalendar;

#[derive(Debug, thiserror::Error)]
pub enum MarketError {
    #[error("market csv: {0}")]
    Csv(String),
    #[error("market data validation failed on {date}: {reason}")]
    Validation { date: NaiveDate, reason: String },
    #[error("market csv format: {0}")]
    Format(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketDay {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl MarketDay {
    pub fn validate(&self) -> Result<(), MarketError> {
        let fail = |reason: &str| {
            Err(MarketError::Validation {
                date: self.date,
                reason: reason.to_string(),
            })
        };
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return fail("prices must be positive and finite");
        }
        if !(self.volume.is_finite() && self.volume > 0.0) {
            return fail("volume must be positive");
        }
        if self.low > self.open.min(self.close) {
            return fail("low above open/close");
        }
        if self.high < self.open.max(self.close) {
            return fail("high below open/close");
        }
        Ok(())
    }
}

/// Reads `date,open,high,low,close,volume` with ascending dates. The trading
/// calendar is the set of row dates.
pub fn parse_market_csv<R: Read>(reader: R) -> Result<(Vec<MarketDay>, TradingCalendar), MarketError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| MarketError::Csv(e.to_string()))?;
    let expected = ["date", "open", "high", "low", "close", "volume"];
    if headers.iter().map(str::trim).collect::<Vec<_>>() != expected {
        return Err(MarketError::Format(format!(
            "expected header `{}`",
            expected.join(",")
        )));
    }
    let mut days: Vec<MarketDay> = Vec::new();
    for rec in rdr.deserialize::<MarketDay>() {
        let day = rec.map_err(|e| MarketError::Csv(e.to_string()))?;
        if let Some(prev) = days.last() {
            if day.date <= prev.date {
                return Err(MarketError::Format(format!(
                    "dates not strictly ascending at {}",
                    day.date
                )));
            }
        }
        day.validate()?;
        days.push(day);
    }
    let cal = TradingCalendar::new(days.iter().map(|d| d.date).collect())
        .map_err(|e| MarketError::Format(e.to_string()))?;
    Ok((days, cal))
}

pub fn write_market_csv<W: Write>(writer: W, days: &[MarketDay]) -> Result<(), MarketError> {
    let mut w = csv::Writer::from_writer(writer);
    for d in days {
        w.serialize(d).map_err(|e| MarketError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| MarketError::Csv(e.to_string()))
}

/// The five predicted market attributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Close,
    Open,
    High,
    Low,
    Volume,
}

impl Target {
    pub const ALL: [Target; 5] = [
        Target::Close,
        Target::Open,
        Target::High,
        Target::Low,
        Target::Volume,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Close => "close",
            Target::Open => "open",
            Target::High => "high",
            Target::Low => "low",
            Target::Volume => "volume",
        }
    }

    /// Percent-change targets, as opposed to raw volume.
    pub fn is_rate(self) -> bool {
        self != Target::Volume
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown target `{s}`"))
    }
}

/// Percent changes against the previous close, plus raw volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub date: NaiveDate,
    pub close_r: f64,
    pub open_r: f64,
    pub high_r: f64,
    pub low_r: f64,
    pub volume: f64,
}

impl TargetRow {
    pub fn value(&self, t: Target) -> f64 {
        match t {
            Target::Close => self.close_r,
            Target::Open => self.open_r,
            Target::High => self.high_r,
            Target::Low => self.low_r,
            Target::Volume => self.volume,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetSeries {
    pub rows: Vec<TargetRow>,
}

impl TargetSeries {
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|r| r.date).collect()
    }

    pub fn values(&self, t: Target) -> Vec<f64> {
        self.rows.iter().map(|r| r.value(t)).collect()
    }

    pub fn get(&self, date: NaiveDate) -> Option<&TargetRow> {
        self.rows
            .binary_search_by_key(&date, |r| r.date)
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn pct_change(value: f64, prev_close: f64) -> f64 {
    (value - prev_close) / prev_close * 100.0
}

/// Close/Open/High/Low as percent change against the previous close. The
/// first day has no previous close and yields no row.
pub fn rate_of_change_targets(days: &[MarketDay]) -> Result<TargetSeries, MarketError> {
    if days.len() < 2 {
        return Err(MarketError::Argument(
            "at least two market days are needed".into(),
        ));
    }
    let rows = days
        .windows(2)
        .map(|w| {
            let (prev, today) = (&w[0], &w[1]);
            if !(prev.close > 0.0) {
                return Err(MarketError::Validation {
                    date: prev.date,
                    reason: "non-positive close".into(),
                });
            }
            Ok(TargetRow {
                date: today.date,
                close_r: pct_change(today.close, prev.close),
                open_r: pct_change(today.open, prev.close),
                high_r: pct_change(today.high, prev.close),
                low_r: pct_change(today.low, prev.close),
                volume: today.volume,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(TargetSeries { rows })
}

pub fn write_targets_csv<W: Write>(writer: W, targets: &TargetSeries) -> Result<(), MarketError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in &targets.rows {
        w.serialize(r).map_err(|e| MarketError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| MarketError::Csv(e.to_string()))
}

pub fn read_targets_csv<R: Read>(reader: R) -> Result<TargetSeries, MarketError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let rows = rdr
        .deserialize::<TargetRow>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| MarketError::Csv(e.to_string()))?;
    Ok(TargetSeries { rows })
}

/// Last training date used by default: rows up to and including it train,
/// later rows test.
pub fn default_split_boundary() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 9, 16).expect("valid date")
}

pub trait Dated {
    fn date(&self) -> NaiveDate;
}

impl Dated for MarketDay {
    fn date(&self) -> NaiveDate {
        self.date
    }
}

impl Dated for TargetRow {
    fn date(&self) -> NaiveDate {
        self.date
    }
}

impl Dated for crate::series::DailyEmotionVector {
    fn date(&self) -> NaiveDate {
        self.date
    }
}

/// Rows dated on or before `boundary` train; the rest test.
pub fn split_train_test<T: Dated + Clone>(rows: &[T], boundary: NaiveDate) -> (Vec<T>, Vec<T>) {
    let (train, test): (Vec<T>, Vec<T>) = rows.iter().cloned().partition(|r| r.date() <= boundary);
    if train.is_empty() {
        log::warn!("training side of the split at {boundary} is empty");
    }
    if test.is_empty() {
        log::warn!("test side of the split at {boundary} is empty");
    }
    (train, test)
}

/// Shanghai Stock Exchange sessions between two dates: weekdays minus the
/// exchange holiday closures. Closures are only listed for December 2014
/// through December 2015.
pub fn sse_sessions(from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
    const CLOSURES: [(i32, u32, u32); 17] = [
        (2015, 1, 1),
        (2015, 1, 2),
        (2015, 2, 18),
        (2015, 2, 19),
        (2015, 2, 20),
        (2015, 2, 23),
        (2015, 2, 24),
        (2015, 4, 6),
        (2015, 5, 1),
        (2015, 6, 22),
        (2015, 9, 3),
        (2015, 9, 4),
        (2015, 10, 1),
        (2015, 10, 2),
        (2015, 10, 5),
        (2015, 10, 6),
        (2015, 10, 7),
    ];
    let closed: Vec<NaiveDate> = CLOSURES
        .iter()
        .map(|&(y, m, d)| NaiveDate::from_ymd_opt(y, m, d).expect("valid date"))
        .collect();
    let mut out = Vec::new();
    let mut day = from;
    while day <= to {
        let weekend = matches!(day.weekday(), Weekday::Sat | Weekday::Sun);
        if !weekend && !closed.contains(&day) {
            out.push(day);
        }
        day += Duration::days(1);
    }
    out
}

/// First and last day of the studied period.
pub fn study_period() -> (NaiveDate, NaiveDate) {
    (
        NaiveDate::from_ymd_opt(2014, 12, 1).expect("valid date"),
        NaiveDate::from_ymd_opt(2015, 12, 7).expect("valid date"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn bar(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> MarketDay {
        MarketDay {
            date,
            open,
            high,
            low,
            close,
            volume: 1e9,
        }
    }

    #[test]
    fn parses_well_formed_rows() {
        let csv = "date,open,high,low,close,volume\n\
                   2015-01-05,3258.6,3369.3,3253.9,3350.5,5.3e10\n\
                   2015-01-06,3330.8,3394.2,3303.2,3351.4,5.0e10\n\
                   2015-01-07,3326.3,3374.9,3312.2,3373.9,3.9e10\n";
        let (days, cal) = parse_market_csv(csv.as_bytes()).unwrap();
        assert_eq!(days.len(), 3);
        assert_eq!(cal.days(), &[d(2015, 1, 5), d(2015, 1, 6), d(2015, 1, 7)]);
    }

    #[test]
    fn low_above_open_names_the_date() {
        let csv = "date,open,high,low,close,volume\n2015-01-05,3000,3100,3050,3080,1\n";
        match parse_market_csv(csv.as_bytes()) {
            Err(MarketError::Validation { date, .. }) => assert_eq!(date, d(2015, 1, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotone_dates_rejected() {
        let csv = "date,open,high,low,close,volume\n\
                   2015-01-06,1,1,1,1,1\n2015-01-05,1,1,1,1,1\n";
        assert!(matches!(
            parse_market_csv(csv.as_bytes()),
            Err(MarketError::Format(_))
        ));
        let bad_header = "day,open,high,low,close,volume\n";
        assert!(matches!(
            parse_market_csv(bad_header.as_bytes()),
            Err(MarketError::Format(_))
        ));
    }

    #[test]
    fn rate_of_change_hand_examples() {
        let days = [
            bar(d(2015, 1, 5), 3000.0, 3000.0, 3000.0, 3000.0),
            bar(d(2015, 1, 6), 3000.0, 3000.0, 3000.0, 3000.0),
            bar(d(2015, 1, 7), 3030.0, 3090.0, 2940.0, 3150.0),
        ];
        let t = rate_of_change_targets(&days).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows[0].close_r, 0.0);
        let r = t.rows[1];
        assert!((r.close_r - 5.0).abs() < 1e-12);
        assert!((r.open_r - 1.0).abs() < 1e-12);
        assert!((r.high_r - 3.0).abs() < 1e-12);
        assert!((r.low_r + 2.0).abs() < 1e-12);
        assert_eq!(r.volume, 1e9);
        assert!(rate_of_change_targets(&days[..1]).is_err());
    }

    #[test]
    fn split_partitions_by_date() {
        let rows: Vec<_> = (0..10)
            .map(|i| bar(d(2015, 9, 10) + Duration::days(i), 1.0, 1.0, 1.0, 1.0))
            .collect();
        let (train, test) = split_train_test(&rows, rows[7].date);
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = split_train_test(&rows, d(2016, 1, 1));
        assert_eq!((train.len(), test.len()), (10, 0));
    }

    #[test]
    fn study_period_calendar() {
        let (from, to) = study_period();
        let sessions = sse_sessions(from, to);
        assert_eq!(sessions.len(), 249);
        let (train, test): (Vec<NaiveDate>, Vec<NaiveDate>) =
            sessions.iter().partition(|x| **x <= default_split_boundary());
        assert_eq!(*train.last().unwrap(), d(2015, 9, 16));
        assert_eq!(test[0], d(2015, 9, 17));
        assert_eq!(sessions[5], d(2014, 12, 8));
    }

    #[test]
    fn targets_csv_round_trip() {
        let days = [
            bar(d(2015, 1, 5), 3000.0, 3010.0, 2990.0, 3000.0),
            bar(d(2015, 1, 6), 3001.0, 3090.0, 2940.0, 3050.5),
        ];
        let t = rate_of_change_targets(&days).unwrap();
        let mut buf = Vec::new();
        write_targets_csv(&mut buf, &t).unwrap();
        assert!(buf.starts_with(b"date,close_r,open_r,high_r,low_r,volume\n"));
        assert_eq!(read_targets_csv(buf.as_slice()).unwrap(), t);
    }

    fn arb_days() -> impl Strategy<Value = Vec<MarketDay>> {
        prop::collection::vec((0.5f64..2.0, 0.5f64..2.0, 0.0f64..0.1, 0.0f64..0.1), 2..40).prop_map(
            |steps| {
                let mut close = 3000.0;
                steps
                    .into_iter()
                    .enumerate()
                    .map(|(i, (o, c, up, down))| {
                        let open = close * (0.95 + 0.05 * o);
                        close *= 0.95 + 0.05 * c;
                        MarketDay {
                            date: NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + Duration::days(i as i64),
                            open,
                            high: open.max(close) * (1.0 + up),
                            low: open.min(close) * (1.0 - down),
                            close,
                            volume: 1.0,
                        }
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #[test]
        fn close_reconstructs_and_orders(days in arb_days()) {
            let t = rate_of_change_targets(&days).unwrap();
            prop_assert_eq!(t.len(), days.len() - 1);
            for (i, r) in t.rows.iter().enumerate() {
                let rebuilt = days[i].close * (1.0 + r.close_r / 100.0);
                prop_assert!(((rebuilt - days[i + 1].close) / days[i + 1].close).abs() <= 1e-9);
                prop_assert!(r.high_r >= r.close_r && r.close_r >= r.low_r);
                prop_assert!(r.high_r >= r.open_r && r.open_r >= r.low_r);
            }
        }

        #[test]
        fn split_is_a_partition(days in arb_days(), cut in 0usize..40) {
            let boundary = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + Duration::days(cut as i64);
            let (train, test) = split_train_test(&days, boundary);
            prop_assert_eq!(train.len() + test.len(), days.len());
            prop_assert!(train.iter().all(|r| r.date <= boundary));
            prop_assert!(test.iter().all(|r| r.date > boundary));
        }
    }
}
