use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::features::{FeatureSource, FeatureSpec};
use super::ModelError;
use crate::discretize::{equal_frequency_fit, kmeans1d_fit, DiscretizeMethod, Discretizer, KmeansConfig};
use crate::market::TargetSeries;
use crate::series::{EmotionSeries, MinMax, TradingCalendar};

/// Unscaled feature rows with their continuous target values.
///
/// `sources[r][c]` is the session the value in column `c` of row `r` was
/// read from, kept so that look-ahead can be audited.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub spec: FeatureSpec,
    pub dates: Vec<NaiveDate>,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub sources: Vec<Vec<NaiveDate>>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn subset(&self, rows: &[usize]) -> RawDataset {
        RawDataset {
            spec: self.spec.clone(),
            dates: rows.iter().map(|r| self.dates[*r]).collect(),
            features: rows.iter().map(|r| self.features[*r].clone()).collect(),
            targets: rows.iter().map(|r| self.targets[*r]).collect(),
            sources: rows.iter().map(|r| self.sources[*r].clone()).collect(),
        }
    }

    /// Rows dated on or before `boundary`, then the rest.
    pub fn split(&self, boundary: NaiveDate) -> (RawDataset, RawDataset) {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..self.len()).partition(|r| self.dates[*r] <= boundary);
        (self.subset(&train), self.subset(&test))
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.dates.first().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates.last().copied()
    }
}

/// Value of one feature source on one session.
pub fn source_value(
    source: FeatureSource,
    date: NaiveDate,
    emotions: &EmotionSeries,
    targets: &TargetSeries,
) -> Option<f64> {
    match source {
        FeatureSource::Emotion(e) => emotions.get(date).map(|r| r.proportion(e)),
        FeatureSource::MarketReturn => targets.get(date).map(|r| r.close_r),
    }
}

/// Joins lagged sources onto target days. A lag counts sessions of
/// `calendar`, so the value for lag `l` on session `k` is read on session
/// `k - l`. Rows with any missing source are dropped.
pub fn assemble(
    spec: &FeatureSpec,
    emotions: &EmotionSeries,
    targets: &TargetSeries,
    calendar: &TradingCalendar,
) -> Result<RawDataset, ModelError> {
    let days = calendar.days();
    let mut out = RawDataset {
        spec: spec.clone(),
        dates: Vec::new(),
        features: Vec::new(),
        targets: Vec::new(),
        sources: Vec::new(),
    };
    'rows: for row in &targets.rows {
        let Some(k) = calendar.index_of(row.date) else {
            continue;
        };
        let mut features = Vec::with_capacity(spec.entries().len());
        let mut sources = Vec::with_capacity(spec.entries().len());
        for entry in spec.entries() {
            if k < entry.lag {
                continue 'rows;
            }
            let src = days[k - entry.lag];
            let Some(v) = source_value(entry.source, src, emotions, targets) else {
                continue 'rows;
            };
            features.push(v);
            sources.push(src);
        }
        out.dates.push(row.date);
        out.features.push(features);
        out.targets.push(row.value(spec.target()));
        out.sources.push(sources);
    }
    if out.is_empty() {
        return Err(ModelError::EmptyDataset(format!(
            "no {} rows have every lagged feature available",
            spec.target()
        )));
    }
    Ok(out)
}

/// How three-class labels are cut from the training targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub method: DiscretizeMethod,
    #[serde(default)]
    pub kmeans: KmeansConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            method: DiscretizeMethod::Kmeans,
            kmeans: KmeansConfig::default(),
        }
    }
}

/// Feature scaling bounds and target discretizer, both fitted on training
/// rows only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub bounds: Vec<MinMax>,
    pub discretizer: Discretizer,
}

impl Preprocessor {
    pub fn fit(train: &RawDataset, cfg: &PreprocessConfig, seed: u64) -> Result<Self, ModelError> {
        if train.len() < 2 {
            return Err(ModelError::EmptyDataset("fewer than two training rows".into()));
        }
        let names = train.spec.names();
        let bounds = (0..train.spec.entries().len())
            .map(|c| {
                let col: Vec<f64> = train.features.iter().map(|r| r[c]).collect();
                MinMax::fit(&col).map_err(|e| ModelError::Degenerate(format!("feature {}: {e}", names[c])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let discretizer = if train.spec.arity() == 2 {
            Discretizer::sign()
        } else {
            let fitted = match cfg.method {
                DiscretizeMethod::EqualFrequency => equal_frequency_fit(&train.targets),
                DiscretizeMethod::Kmeans => kmeans1d_fit(&train.targets, &cfg.kmeans, seed),
                DiscretizeMethod::Sign => {
                    return Err(ModelError::Spec("three-class labels need equal_frequency or kmeans".into()))
                }
            };
            fitted.map_err(|e| ModelError::Degenerate(format!("{} target: {e}", train.spec.target())))?
        };
        let (first, last) = (train.dates[0], train.dates[train.len() - 1]);
        Ok(Preprocessor {
            bounds,
            discretizer: discretizer.with_fit_window(first, last),
        })
    }

    pub fn scale_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.bounds).map(|(v, b)| b.apply(*v)).collect()
    }

    pub fn apply(&self, raw: &RawDataset) -> Dataset {
        Dataset {
            dates: raw.dates.clone(),
            features: raw.features.iter().map(|r| self.scale_row(r)).collect(),
            labels: raw.targets.iter().map(|t| self.discretizer.classify(*t)).collect(),
            classes: self.discretizer.classes.clone(),
        }
    }
}

/// Scaled features with class labels, ready for a classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dates: Vec<NaiveDate>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
    /// Every label the discretizer can produce, ascending.
    pub classes: Vec<i8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Labels that occur at least once, ascending.
    pub fn present_classes(&self) -> Vec<i8> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            dates: rows.iter().map(|r| self.dates[*r]).collect(),
            features: rows.iter().map(|r| self.features[*r].clone()).collect(),
            labels: rows.iter().map(|r| self.labels[*r]).collect(),
            classes: self.classes.clone(),
        }
    }
}

/// Train/test datasets for one spec, with preprocessing fitted on the
/// training window.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub raw_train: RawDataset,
    pub raw_test: RawDataset,
    pub preprocessor: Preprocessor,
    pub train: Dataset,
    pub test: Dataset,
}

pub fn build_datasets(
    spec: &FeatureSpec,
    emotions: &EmotionSeries,
    targets: &TargetSeries,
    calendar: &TradingCalendar,
    boundary: NaiveDate,
    cfg: &PreprocessConfig,
    seed: u64,
) -> Result<Prepared, ModelError> {
    let raw = assemble(spec, emotions, targets, calendar)?;
    let (raw_train, raw_test) = raw.split(boundary);
    if raw_train.is_empty() {
        return Err(ModelError::EmptyDataset(format!("no rows on or before {boundary}")));
    }
    if raw_test.is_empty() {
        log::warn!("no {} rows after {boundary}; the test set is empty", spec.target());
    }
    let preprocessor = Preprocessor::fit(&raw_train, cfg, seed)?;
    Ok(Prepared {
        train: preprocessor.apply(&raw_train),
        test: preprocessor.apply(&raw_test),
        raw_train,
        raw_test,
        preprocessor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{sse_sessions, study_period, Target, TargetRow};
    use crate::models::features::{svmes_feature_spec, svmmr_feature_spec, FeatureEntry};
    use crate::series::DailyEmotionVector;
    use crate::Emotion;

    fn weekdays(n: usize) -> Vec<NaiveDate> {
        let mut d = NaiveDate::from_ymd_opt(2015, 3, 2).unwrap();
        let mut out = Vec::new();
        while out.len() < n {
            if chrono::Datelike::weekday(&d).number_from_monday() <= 5 {
                out.push(d);
            }
            d = d.succ_opt().unwrap();
        }
        out
    }

    fn fixture(days: &[NaiveDate]) -> (EmotionSeries, TargetSeries, TradingCalendar) {
        let rows = days
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let i = i as u64;
                DailyEmotionVector::from_counts(*d, [1 + i % 3, 2 + i % 5, 3 + i % 7, 4, 1 + i % 2]).unwrap()
            })
            .collect();
        let emotions = EmotionSeries::new(rows, None).unwrap();
        let targets = TargetSeries {
            rows: days
                .iter()
                .enumerate()
                .map(|(i, d)| TargetRow {
                    date: *d,
                    close_r: (i as f64 * 0.7).sin(),
                    open_r: (i as f64 * 0.3).cos(),
                    high_r: 1.0 + (i as f64).sin().abs(),
                    low_r: -1.0 - (i as f64).cos().abs(),
                    volume: 1e6 + i as f64,
                })
                .collect(),
        };
        (emotions, targets, TradingCalendar::new(days.to_vec()).unwrap())
    }

    #[test]
    fn twenty_days_at_lag_five_give_fifteen_rows() {
        let days = weekdays(20);
        let (em, tg, cal) = fixture(&days);
        let spec = FeatureSpec::new(vec![FeatureEntry::emotion(Emotion::Joy, 5)], Target::Close, 3).unwrap();
        let raw = assemble(&spec, &em, &tg, &cal).unwrap();
        assert_eq!(raw.len(), 15);
        assert_eq!(raw.dates[0], days[5]);
        assert_eq!(raw.features[0][0], em.get(days[0]).unwrap().proportion(Emotion::Joy));
    }

    #[test]
    fn lags_skip_weekends() {
        let days = weekdays(10);
        let (em, tg, cal) = fixture(&days);
        let spec = svmes_feature_spec(Target::Close, 3).unwrap();
        let raw = assemble(&spec, &em, &tg, &cal).unwrap();
        // 2015-03-09 is a Monday; lag 1 reads the Friday before
        let monday = NaiveDate::from_ymd_opt(2015, 3, 9).unwrap();
        let r = raw.dates.iter().position(|d| *d == monday).unwrap();
        assert_eq!(raw.sources[r][0], NaiveDate::from_ymd_opt(2015, 3, 6).unwrap());
        assert_eq!(raw.sources[r][1], NaiveDate::from_ymd_opt(2015, 3, 5).unwrap());
    }

    #[test]
    fn no_feature_reads_the_future() {
        let days = weekdays(40);
        let (em, tg, cal) = fixture(&days);
        for t in Target::ALL {
            for spec in [svmes_feature_spec(t, 3).unwrap(), svmmr_feature_spec(t, 3).unwrap()] {
                let raw = assemble(&spec, &em, &tg, &cal).unwrap();
                for (d, src) in raw.dates.iter().zip(&raw.sources) {
                    assert!(src.iter().all(|s| s < d));
                }
            }
        }
    }

    #[test]
    fn market_return_features_match_a_direct_join() {
        let days = weekdays(30);
        let (em, tg, cal) = fixture(&days);
        let raw = assemble(&svmmr_feature_spec(Target::High, 3).unwrap(), &em, &tg, &cal).unwrap();
        for (d, row) in raw.dates.iter().zip(&raw.features) {
            let i = days.iter().position(|x| x == d).unwrap();
            let expected: Vec<f64> = (1..=5).map(|l| tg.rows[i - l].close_r).collect();
            assert_eq!(row, &expected);
        }
    }

    #[test]
    fn missing_source_days_are_dropped() {
        let days = weekdays(12);
        let (em, tg, cal) = fixture(&days);
        let kept: Vec<_> = em.rows().iter().filter(|r| r.date != days[4]).cloned().collect();
        let em = EmotionSeries::new(kept, None).unwrap();
        let spec = FeatureSpec::new(vec![FeatureEntry::emotion(Emotion::Fear, 1)], Target::Close, 3).unwrap();
        let raw = assemble(&spec, &em, &tg, &cal).unwrap();
        assert_eq!(raw.len(), 10);
        assert!(!raw.dates.contains(&days[5]));
    }

    #[test]
    fn study_window_starts_after_five_sessions() {
        let (from, to) = study_period();
        let days = sse_sessions(from, to);
        let (em, tg, cal) = fixture(&days);
        let spec = svmes_feature_spec(Target::Volume, 3).unwrap();
        let raw = assemble(&spec, &em, &tg, &cal).unwrap();
        assert_eq!(raw.dates[0], NaiveDate::from_ymd_opt(2014, 12, 8).unwrap());
        let (train, _) = raw.split(crate::market::default_split_boundary());
        assert_eq!(train.len(), 191);
    }

    #[test]
    fn preprocessing_uses_training_rows_only() {
        let days = weekdays(60);
        let (em, tg, cal) = fixture(&days);
        let spec = svmes_feature_spec(Target::Close, 3).unwrap();
        let boundary = days[39];
        let p = build_datasets(&spec, &em, &tg, &cal, boundary, &PreprocessConfig::default(), 1).unwrap();
        for (c, b) in p.preprocessor.bounds.iter().enumerate() {
            let col: Vec<f64> = p.raw_train.features.iter().map(|r| r[c]).collect();
            assert_eq!(b.min, col.iter().cloned().fold(f64::INFINITY, f64::min));
            assert_eq!(b.max, col.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
        assert!(p.train.features.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(p.preprocessor.discretizer.fit_window, Some((p.raw_train.dates[0], boundary)));
        assert!(p.test.dates.iter().all(|d| *d > boundary));
        assert_eq!(p.train.len() + p.test.len(), 58);
        let two = build_datasets(
            &svmes_feature_spec(Target::Close, 2).unwrap(),
            &em,
            &tg,
            &cal,
            boundary,
            &PreprocessConfig::default(),
            1,
        )
        .unwrap();
        for (l, t) in two.train.labels.iter().zip(&two.raw_train.targets) {
            assert_eq!(*l, i8::from(*t > 0.0));
        }
    }
}
