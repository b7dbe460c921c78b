//! Investor segmentation by follower count and gender, the joy-to-fear
//! ratio and its volatility.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{Gender, TweetRecord};
use crate::series::EmotionSeries;
use crate::Emotion;

#[derive(Debug, thiserror::Error)]
pub enum InvestorError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvestorSegment {
    #[serde(rename = "flevel_1")]
    FLevel1,
    #[serde(rename = "flevel_2")]
    FLevel2,
    #[serde(rename = "flevel_3")]
    FLevel3,
    Female,
    Male,
    All,
}

impl InvestorSegment {
    pub const ALL: [InvestorSegment; 6] = [
        InvestorSegment::FLevel1,
        InvestorSegment::FLevel2,
        InvestorSegment::FLevel3,
        InvestorSegment::Female,
        InvestorSegment::Male,
        InvestorSegment::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InvestorSegment::FLevel1 => "flevel_1",
            InvestorSegment::FLevel2 => "flevel_2",
            InvestorSegment::FLevel3 => "flevel_3",
            InvestorSegment::Female => "female",
            InvestorSegment::Male => "male",
            InvestorSegment::All => "all",
        }
    }
}

impl fmt::Display for InvestorSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InvestorSegment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InvestorSegment::ALL
            .into_iter()
            .find(|seg| seg.name() == s)
            .ok_or_else(|| format!("unknown segment `{s}`"))
    }
}

/// Follower-count cut points. Level I is `[0, low]`, level II `(low, high)`
/// and level III `[high, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FLevelThresholds {
    pub low: u64,
    pub high: u64,
}

impl Default for FLevelThresholds {
    fn default() -> Self {
        FLevelThresholds {
            low: 100,
            high: 10_000,
        }
    }
}

impl FLevelThresholds {
    pub fn level(&self, followers: u64) -> InvestorSegment {
        if followers <= self.low {
            InvestorSegment::FLevel1
        } else if followers < self.high {
            InvestorSegment::FLevel2
        } else {
            InvestorSegment::FLevel3
        }
    }
}

/// One F-level, the gender segment when known, and `All`.
pub fn assign_segment(record: &TweetRecord, thresholds: &FLevelThresholds) -> BTreeSet<InvestorSegment> {
    let mut out = BTreeSet::new();
    out.insert(thresholds.level(record.followers));
    match record.gender {
        Gender::Female => {
            out.insert(InvestorSegment::Female);
        }
        Gender::Male => {
            out.insert(InvestorSegment::Male);
        }
        Gender::Unknown => {}
    }
    out.insert(InvestorSegment::All);
    out
}

/// Daily joy-to-fear ratios; days without fear are left out and counted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RjfSeries {
    pub rows: Vec<(NaiveDate, f64)>,
    pub excluded: usize,
}

impl RjfSeries {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }
}

pub fn compute_rjf(series: &EmotionSeries) -> RjfSeries {
    let mut out = RjfSeries::default();
    for row in series.rows() {
        let fear = row.proportion(Emotion::Fear);
        if fear > 0.0 {
            out.rows.push((row.date, row.proportion(Emotion::Joy) / fear));
        } else {
            out.excluded += 1;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolatilityReport {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    pub rolling: Option<Vec<(NaiveDate, f64)>>,
}

/// Mean and `N - 1` sample standard deviation.
fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    if values.iter().all(|v| *v == values[0]) {
        return (values[0], 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mu).powi(2)).sum();
    (mu, (ss / (n - 1.0)).sqrt())
}

pub fn volatility(r: &RjfSeries) -> Result<VolatilityReport, InvestorError> {
    if r.rows.len() < 2 {
        return Err(InvestorError::Argument(format!(
            "volatility needs at least two values, got {}",
            r.rows.len()
        )));
    }
    let (mu, sigma) = mean_and_sd(&r.values());
    Ok(VolatilityReport {
        mu,
        sigma,
        n: r.rows.len(),
        rolling: None,
    })
}

/// Standard deviation over each trailing window, dated at the window end.
pub fn rolling_volatility(r: &RjfSeries, window: usize) -> Result<Vec<(NaiveDate, f64)>, InvestorError> {
    if window < 2 {
        return Err(InvestorError::Argument("window must be at least 2".into()));
    }
    if r.rows.len() < window {
        return Err(InvestorError::Argument(format!(
            "series of {} shorter than window {window}",
            r.rows.len()
        )));
    }
    let values = r.values();
    Ok(values
        .windows(window)
        .zip(&r.rows[window - 1..])
        .map(|(w, (date, _))| (*date, mean_and_sd(w).1))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentVolatility {
    pub segment: InvestorSegment,
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    pub excluded_days: usize,
}

/// `segment,mu,sigma,n,excluded_days`
pub fn write_segment_report<W: Write>(writer: W, rows: &[SegmentVolatility]) -> Result<(), InvestorError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r).map_err(|e| InvestorError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| InvestorError::Csv(e.to_string()))
}

/// `date,segment,sigma`
pub fn write_rolling_report<W: Write>(
    writer: W,
    rows: &[(InvestorSegment, Vec<(NaiveDate, f64)>)],
) -> Result<(), InvestorError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "segment", "sigma"])
        .map_err(|e| InvestorError::Csv(e.to_string()))?;
    for (segment, series) in rows {
        for (date, sigma) in series {
            w.write_record([date.to_string(), segment.to_string(), sigma.to_string()])
                .map_err(|e| InvestorError::Csv(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| InvestorError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::civil_offset;
    use crate::series::DailyEmotionVector;
    use chrono::{Duration, TimeZone};
    use proptest::prelude::*;

    fn user(followers: u64, gender: Gender) -> TweetRecord {
        TweetRecord {
            id: "u".into(),
            timestamp: civil_offset().with_ymd_and_hms(2015, 1, 5, 9, 0, 0).unwrap(),
            text: "股票".into(),
            followers,
            gender,
            label: None,
        }
    }

    fn rjf(values: &[f64]) -> RjfSeries {
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        RjfSeries {
            rows: values
                .iter()
                .enumerate()
                .map(|(i, v)| (start + Duration::days(i as i64), *v))
                .collect(),
            excluded: 0,
        }
    }

    #[test]
    fn segment_examples() {
        use InvestorSegment::*;
        let t = FLevelThresholds::default();
        assert_eq!(
            assign_segment(&user(50, Gender::Female), &t),
            BTreeSet::from([FLevel1, Female, All])
        );
        assert!(assign_segment(&user(100, Gender::Male), &t).contains(&FLevel1));
        assert!(assign_segment(&user(101, Gender::Male), &t).contains(&FLevel2));
        assert!(assign_segment(&user(9_999, Gender::Male), &t).contains(&FLevel2));
        assert_eq!(
            assign_segment(&user(20_000, Gender::Unknown), &t),
            BTreeSet::from([FLevel3, All])
        );
        assert!(assign_segment(&user(10_000, Gender::Unknown), &t).contains(&FLevel3));
    }

    #[test]
    fn rjf_examples() {
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let rows = vec![
            DailyEmotionVector::from_counts(start, [1, 1, 1, 1, 1]).unwrap(),
            DailyEmotionVector::from_counts(start + Duration::days(1), [1, 1, 4, 2, 2]).unwrap(),
            DailyEmotionVector::from_counts(start + Duration::days(2), [1, 1, 4, 2, 0]).unwrap(),
        ];
        let r = compute_rjf(&EmotionSeries::new(rows, None).unwrap());
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].1, 1.0);
        assert!((r.rows[1].1 - 2.0).abs() < 1e-12);
        assert_eq!(r.excluded, 1);
    }

    #[test]
    fn volatility_examples() {
        let v = volatility(&rjf(&[1.0, 2.0, 3.0])).unwrap();
        assert!((v.mu - 2.0).abs() < 1e-12);
        assert!((v.sigma - 1.0).abs() < 1e-12);
        assert_eq!(v.n, 3);
        assert_eq!(volatility(&rjf(&[0.7; 12])).unwrap().sigma, 0.0);
        assert!(volatility(&rjf(&[1.0])).is_err());
    }

    #[test]
    fn rolling_examples() {
        let flat = rolling_volatility(&rjf(&[0.3; 25]), 20).unwrap();
        assert_eq!(flat.len(), 6);
        assert!(flat.iter().all(|(_, s)| *s == 0.0));

        let r = rjf(&[1.5; 21]);
        let out = rolling_volatility(&r, 20).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, r.rows[19].0);

        let mut step = vec![1.0; 10];
        step.extend(vec![2.0; 10]);
        let out = rolling_volatility(&rjf(&step), 20).unwrap();
        let expected = (20.0 * 0.25 / 19.0f64).sqrt();
        assert!((out[0].1 - expected).abs() < 1e-12);
        assert!((expected - 0.5130).abs() < 1e-4);

        assert!(rolling_volatility(&rjf(&[1.0; 5]), 20).is_err());
        assert!(rolling_volatility(&rjf(&[1.0; 5]), 1).is_err());
    }

    #[test]
    fn report_csv_headers() {
        let mut buf = Vec::new();
        write_segment_report(
            &mut buf,
            &[SegmentVolatility {
                segment: InvestorSegment::FLevel2,
                mu: 1.0,
                sigma: 0.5,
                n: 10,
                excluded_days: 1,
            }],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "segment,mu,sigma,n,excluded_days\nflevel_2,1.0,0.5,10,1\n"
        );
        let mut buf = Vec::new();
        let d = NaiveDate::from_ymd_opt(2015, 2, 2).unwrap();
        write_rolling_report(&mut buf, &[(InvestorSegment::Male, vec![(d, 0.25)])]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "date,segment,sigma\n2015-02-02,male,0.25\n");
    }

    proptest! {
        #[test]
        fn exactly_one_flevel(followers in 0u64..1_000_000) {
            let segs = assign_segment(&user(followers, Gender::Unknown), &FLevelThresholds::default());
            let levels = segs
                .iter()
                .filter(|s| matches!(s, InvestorSegment::FLevel1 | InvestorSegment::FLevel2 | InvestorSegment::FLevel3))
                .count();
            prop_assert_eq!(levels, 1);
        }

        #[test]
        fn rjf_is_scale_free(counts in prop::array::uniform5(1u64..500), k in 1u64..20) {
            let d = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
            let a = EmotionSeries::new(vec![DailyEmotionVector::from_counts(d, counts).unwrap()], None).unwrap();
            let b = EmotionSeries::new(vec![DailyEmotionVector::from_counts(d, counts.map(|c| c * k)).unwrap()], None).unwrap();
            let (ra, rb) = (compute_rjf(&a).rows[0].1, compute_rjf(&b).rows[0].1);
            prop_assert!((ra - rb).abs() <= 1e-12 * ra.abs());
        }

        #[test]
        fn sigma_matches_brute_force(values in prop::collection::vec(0.01f64..5.0, 2..60)) {
            let v = volatility(&rjf(&values)).unwrap();
            let n = values.len() as f64;
            let mu = values.iter().sum::<f64>() / n;
            let sd = (values.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0)).sqrt();
            prop_assert!((v.sigma - sd).abs() <= 1e-12 * (1.0 + sd));
            // concatenating a series with itself keeps the population spread
            let mut twice = values.clone();
            twice.extend(&values);
            let v2 = volatility(&rjf(&twice)).unwrap();
            let pop = |s: f64, m: f64| s * ((m - 1.0) / m).sqrt();
            prop_assert!((pop(v2.sigma, 2.0 * n) - pop(v.sigma, n)).abs() <= 1e-9 * (1.0 + v.sigma));
        }
    }
}
