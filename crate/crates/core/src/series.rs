//! Daily emotion proportion series and the transforms applied to them.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::TweetRecord;
use crate::investors::InvestorSegment;
use crate::Emotion;

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate series: max equals min ({0})")]
    Degenerate(f64),
    #[error("dates must be strictly increasing (at {0})")]
    NotIncreasing(NaiveDate),
    #[error("emotion csv: {0}")]
    Csv(String),
}

/// Emotion counts of one civil day and the derived proportions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DailyEmotionVector {
    pub date: NaiveDate,
    pub counts: [u64; 5],
    pub proportions: [f64; 5],
    pub total: u64,
}

impl DailyEmotionVector {
    /// `None` when all counts are zero.
    pub fn from_counts(date: NaiveDate, counts: [u64; 5]) -> Option<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return None;
        }
        let proportions = counts.map(|c| c as f64 / total as f64);
        Some(DailyEmotionVector {
            date,
            counts,
            proportions,
            total,
        })
    }

    pub fn proportion(&self, e: Emotion) -> f64 {
        self.proportions[e.index()]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmotionSeries {
    rows: Vec<DailyEmotionVector>,
    pub segment: Option<InvestorSegment>,
}

impl EmotionSeries {
    pub fn new(
        rows: Vec<DailyEmotionVector>,
        segment: Option<InvestorSegment>,
    ) -> Result<Self, SeriesError> {
        check_increasing(rows.iter().map(|r| r.date))?;
        Ok(EmotionSeries { rows, segment })
    }

    pub fn rows(&self) -> &[DailyEmotionVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|r| r.date).collect()
    }

    pub fn column(&self, e: Emotion) -> Vec<f64> {
        self.rows.iter().map(|r| r.proportion(e)).collect()
    }

    pub fn get(&self, date: NaiveDate) -> Option<&DailyEmotionVector> {
        self.rows
            .binary_search_by_key(&date, |r| r.date)
            .ok()
            .map(|i| &self.rows[i])
    }
}

fn check_increasing(dates: impl Iterator<Item = NaiveDate>) -> Result<(), SeriesError> {
    let mut prev: Option<NaiveDate> = None;
    for d in dates {
        if prev.is_some_and(|p| d <= p) {
            return Err(SeriesError::NotIncreasing(d));
        }
        prev = Some(d);
    }
    Ok(())
}

/// Ordered set of trading dates, taken from the market data file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingCalendar {
    days: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(days: Vec<NaiveDate>) -> Result<Self, SeriesError> {
        check_increasing(days.iter().copied())?;
        Ok(TradingCalendar { days })
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.index_of(date).is_some()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.days.binary_search(&date).ok()
    }
}

/// Counts classified posts per UTC+8 civil date.
pub fn aggregate_daily<'a, I>(classified: I) -> EmotionSeries
where
    I: IntoIterator<Item = (&'a TweetRecord, Emotion)>,
{
    let mut days: BTreeMap<NaiveDate, [u64; 5]> = BTreeMap::new();
    for (tweet, label) in classified {
        days.entry(tweet.civil_date()).or_default()[label.index()] += 1;
    }
    let rows = days
        .into_iter()
        .filter_map(|(d, c)| DailyEmotionVector::from_counts(d, c))
        .collect();
    EmotionSeries { rows, segment: None }
}

/// Drops rows dated on non-trading days.
pub fn restrict_to_calendar(series: &EmotionSeries, cal: &TradingCalendar) -> EmotionSeries {
    let rows: Vec<_> = series
        .rows
        .iter()
        .filter(|r| cal.contains(r.date))
        .cloned()
        .collect();
    if rows.is_empty() && !series.is_empty() && !cal.is_empty() {
        log::warn!("no emotion rows fall on trading days");
    }
    EmotionSeries {
        rows,
        segment: series.segment,
    }
}

/// One row of a lagged series: the proportions observed `lag` rows before
/// `date`, on `source_date`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaggedRow {
    pub date: NaiveDate,
    pub source_date: NaiveDate,
    pub proportions: [f64; 5],
}

/// Shifts the series by `lag` rows. For a calendar-restricted series without
/// gaps this is a trading-day lag.
pub fn lag_series(series: &EmotionSeries, lag: usize) -> Result<Vec<LaggedRow>, SeriesError> {
    if lag == 0 {
        return Err(SeriesError::Argument("lag must be at least 1".into()));
    }
    if lag >= series.len() {
        return Err(SeriesError::Argument(format!(
            "lag {lag} needs more than {} rows",
            series.len()
        )));
    }
    Ok(series.rows[lag..]
        .iter()
        .zip(&series.rows)
        .map(|(now, then)| LaggedRow {
            date: now.date,
            source_date: then.date,
            proportions: then.proportions,
        })
        .collect())
}

/// Trailing-window mean; output has `len - window + 1` entries.
pub fn moving_average(values: &[f64], window: usize) -> Result<Vec<f64>, SeriesError> {
    if window == 0 {
        return Err(SeriesError::Argument("window must be at least 1".into()));
    }
    if window > values.len() {
        return Err(SeriesError::Argument(format!(
            "window {window} longer than series of {}",
            values.len()
        )));
    }
    Ok(values
        .windows(window)
        .map(|w| {
            // shifted by the first element so constant windows are exact
            let base = w[0];
            base + w.iter().map(|v| v - base).sum::<f64>() / window as f64
        })
        .collect())
}

/// Bounds of a min-max rescaling to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: &[f64]) -> Result<Self, SeriesError> {
        if values.len() < 2 {
            return Err(SeriesError::Argument(
                "min-max fit needs at least two values".into(),
            ));
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(SeriesError::Degenerate(min));
        }
        Ok(MinMax { min, max })
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }
}

/// Rescales with the given bounds, or fits them from `values` when absent.
/// Applied bounds may map values outside `[0, 1]`.
pub fn minmax_normalize(
    values: &[f64],
    bounds: Option<MinMax>,
) -> Result<(Vec<f64>, MinMax), SeriesError> {
    let b = match bounds {
        Some(b) => b,
        None => MinMax::fit(values)?,
    };
    Ok((values.iter().map(|v| b.apply(*v)).collect(), b))
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    date: NaiveDate,
    anger: f64,
    disgust: f64,
    joy: f64,
    sadness: f64,
    fear: f64,
    total: u64,
}

/// Writes `date,anger,disgust,joy,sadness,fear,total`. Proportions use the
/// shortest representation that round-trips exactly.
pub fn write_emotion_csv<W: Write>(writer: W, series: &EmotionSeries) -> Result<(), SeriesError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in &series.rows {
        let p = r.proportions;
        w.serialize(CsvRow {
            date: r.date,
            anger: p[0],
            disgust: p[1],
            joy: p[2],
            sadness: p[3],
            fear: p[4],
            total: r.total,
        })
        .map_err(|e| SeriesError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| SeriesError::Csv(e.to_string()))
}

pub fn read_emotion_csv<R: Read>(
    reader: R,
    segment: Option<InvestorSegment>,
) -> Result<EmotionSeries, SeriesError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<CsvRow>() {
        let r = rec.map_err(|e| SeriesError::Csv(e.to_string()))?;
        if r.total == 0 {
            return Err(SeriesError::Csv(format!("{}: total is zero", r.date)));
        }
        let props = [r.anger, r.disgust, r.joy, r.sadness, r.fear];
        let counts = props.map(|p| (p * r.total as f64).round() as u64);
        let row = DailyEmotionVector::from_counts(r.date, counts)
            .filter(|row| row.total == r.total)
            .ok_or_else(|| {
                SeriesError::Csv(format!("{}: proportions inconsistent with total", r.date))
            })?;
        rows.push(row);
    }
    EmotionSeries::new(rows, segment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{civil_offset, Gender};
    use chrono::{Duration, TimeZone};
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn tweet_on(date: NaiveDate, hour: u32) -> TweetRecord {
        TweetRecord {
            id: "t".into(),
            timestamp: civil_offset()
                .from_local_datetime(&date.and_hms_opt(hour, 0, 0).unwrap())
                .unwrap(),
            text: "股市".into(),
            followers: 3,
            gender: Gender::Male,
            label: None,
        }
    }

    fn series_of(values: &[[u64; 5]], start: NaiveDate) -> EmotionSeries {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, c)| DailyEmotionVector::from_counts(start + Duration::days(i as i64), *c).unwrap())
            .collect();
        EmotionSeries::new(rows, None).unwrap()
    }

    #[test]
    fn aggregate_hand_example() {
        let day = d(2015, 3, 2);
        let t = tweet_on(day, 10);
        let items = vec![
            (&t, Emotion::Joy),
            (&t, Emotion::Joy),
            (&t, Emotion::Joy),
            (&t, Emotion::Fear),
        ];
        let s = aggregate_daily(items);
        assert_eq!(s.len(), 1);
        assert_eq!(s.rows()[0].proportions, [0.0, 0.0, 0.75, 0.0, 0.25]);
        assert_eq!(s.rows()[0].total, 4);
    }

    #[test]
    fn aggregate_symmetry_and_empty() {
        let t = tweet_on(d(2015, 3, 2), 1);
        let s = aggregate_daily(Emotion::ALL.iter().map(|e| (&t, *e)));
        assert!(s.rows()[0].proportions.iter().all(|p| *p == 0.2));
        assert!(aggregate_daily(Vec::new()).is_empty());
    }

    #[test]
    fn restrict_drops_weekend() {
        // 2015-03-02 is a Monday
        let s = series_of(&[[1, 0, 0, 0, 0]; 7], d(2015, 3, 2));
        let weekdays: Vec<_> = (0..5).map(|i| d(2015, 3, 2) + Duration::days(i)).collect();
        let cal = TradingCalendar::new(weekdays.clone()).unwrap();
        let r = restrict_to_calendar(&s, &cal);
        assert_eq!(r.dates(), weekdays);

        let wide = TradingCalendar::new((0..10).map(|i| d(2015, 3, 1) + Duration::days(i)).collect()).unwrap();
        assert_eq!(restrict_to_calendar(&s, &wide), s);
    }

    #[test]
    fn restrict_commutes_with_aggregation() {
        let start = d(2015, 3, 1);
        let tweets: Vec<_> = (0..30).map(|i| tweet_on(start + Duration::days(i % 9), (i % 24) as u32)).collect();
        let labels: Vec<_> = (0..30).map(|i| Emotion::ALL[i % 5]).collect();
        let cal = TradingCalendar::new(vec![d(2015, 3, 2), d(2015, 3, 3), d(2015, 3, 6), d(2015, 3, 20)]).unwrap();

        let a = restrict_to_calendar(&aggregate_daily(tweets.iter().zip(labels.iter().copied())), &cal);
        let b = aggregate_daily(
            tweets
                .iter()
                .zip(labels.iter().copied())
                .filter(|(t, _)| cal.contains(t.civil_date())),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn lag_shift_definition() {
        let s = series_of(&[[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0]], d(2015, 3, 2));
        let lagged = lag_series(&s, 1).unwrap();
        assert_eq!(lagged.len(), 2);
        assert_eq!(lagged[0].date, s.rows()[1].date);
        assert_eq!(lagged[0].proportions, s.rows()[0].proportions);
        assert_eq!(lagged[1].proportions, s.rows()[1].proportions);
        assert!(lag_series(&s, 0).is_err());
        assert!(lag_series(&s, 3).is_err());
    }

    #[test]
    fn lag_length_arithmetic() {
        let s = series_of(&vec![[1, 2, 3, 4, 5]; 249], d(2014, 12, 1));
        assert_eq!(lag_series(&s, 5).unwrap().len(), 244);
    }

    #[test]
    fn lag_matches_date_join() {
        let counts: Vec<[u64; 5]> = (0..40u64).map(|i| [i + 1, 2 * i + 1, 3, i % 7, 1]).collect();
        let s = series_of(&counts, d(2015, 1, 1));
        let dates = s.dates();
        for k in 1..=5 {
            let lagged = lag_series(&s, k).unwrap();
            for row in &lagged {
                let pos = dates.iter().position(|x| *x == row.date).unwrap();
                assert_eq!(row.source_date, dates[pos - k]);
                assert_eq!(row.proportions, s.get(dates[pos - k]).unwrap().proportions);
            }
            assert_eq!(lagged.iter().map(|r| r.date).collect::<Vec<_>>(), dates[k..].to_vec());
        }
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), [1.5, 2.5, 3.5]);
        let c = vec![0.1; 30];
        assert!(moving_average(&c, 20).unwrap().iter().all(|v| *v == 0.1));
        let v = [1.0, 5.0, 9.0];
        assert_eq!(moving_average(&v, 3).unwrap(), [5.0]);
        assert!(moving_average(&v, 4).is_err());
        assert!(moving_average(&v, 0).is_err());
    }

    #[test]
    fn minmax_examples() {
        let (out, b) = minmax_normalize(&[0.0, 5.0, 10.0], None).unwrap();
        assert_eq!(out, [0.0, 0.5, 1.0]);
        assert_eq!(b, MinMax { min: 0.0, max: 10.0 });
        let (out, _) = minmax_normalize(&[12.0], Some(b)).unwrap();
        assert!((out[0] - 1.2).abs() < 1e-15);
        assert!(matches!(
            minmax_normalize(&[3.0, 3.0, 3.0], None),
            Err(SeriesError::Degenerate(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let s = series_of(&[[3, 1, 4, 1, 5], [9, 2, 6, 5, 3], [0, 0, 1, 0, 0]], d(2015, 6, 1));
        let mut buf = Vec::new();
        write_emotion_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("date,anger,disgust,joy,sadness,fear,total\n2015-06-01,"));
        let back = read_emotion_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn series_rejects_unordered_dates() {
        let a = DailyEmotionVector::from_counts(d(2015, 1, 2), [1; 5]).unwrap();
        let b = DailyEmotionVector::from_counts(d(2015, 1, 1), [1; 5]).unwrap();
        assert!(EmotionSeries::new(vec![a.clone(), b], None).is_err());
        assert!(EmotionSeries::new(vec![a.clone(), a], None).is_err());
        assert!(TradingCalendar::new(vec![d(2015, 1, 2), d(2015, 1, 1)]).is_err());
    }

    proptest! {
        #[test]
        fn proportions_are_distributions(counts in prop::array::uniform5(0u64..1000)) {
            if let Some(row) = DailyEmotionVector::from_counts(d(2015, 1, 1), counts) {
                let s: f64 = row.proportions.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
                prop_assert!(row.proportions.iter().all(|p| (0.0..=1.0).contains(p)));
                prop_assert_eq!(row.counts.iter().sum::<u64>(), row.total);
            } else {
                prop_assert_eq!(counts.iter().sum::<u64>(), 0);
            }
        }

        #[test]
        fn minmax_fit_then_apply_hits_unit_endpoints(values in prop::collection::vec(-1e6f64..1e6, 2..50)) {
            if let Ok((out, _)) = minmax_normalize(&values, None) {
                let lo = out.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(lo, 0.0);
                prop_assert_eq!(hi, 1.0);
            }
        }
    }
}
