//! The pipeline configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use emostock::corpus::{KeywordSet, Tokenizer};
use emostock::investors::{FLevelThresholds, InvestorSegment};
use emostock::market::{default_split_boundary, study_period, Target};
use emostock::models::{CvConfig, FeatureEntry, LogRegParams, ModelKind, PreprocessConfig, SvmParams};
use emostock::stats::{AnalysisConfig, BootstrapConfig};
use emostock::synth::SynthConfig;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw posts, one JSON object per line.
    pub tweets: PathBuf,
    /// Emotion-labeled posts used to train the classifier.
    pub labeled: PathBuf,
    /// Daily `date,open,high,low,close,volume`.
    pub market: PathBuf,
    /// Directory for every artifact the pipeline writes.
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            tweets: "data/tweets.jsonl".into(),
            labeled: "data/labeled.jsonl".into(),
            market: "data/market.csv".into(),
            out: "out".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Expected number of market sessions between `start` and `end`;
    /// `null` skips the check.
    pub sessions: Option<usize>,
}

impl Default for Study {
    fn default() -> Self {
        let (start, end) = study_period();
        Study {
            start,
            end,
            sessions: Some(249),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub smoothing_alpha: f64,
    pub tokenizer: Tokenizer,
    /// Share of labeled posts held out to report classifier accuracy.
    pub heldout_fraction: f64,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        ClassifierSection {
            smoothing_alpha: 1.0,
            tokenizer: Tokenizer::CharBigram,
            heldout_fraction: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub max_lag: usize,
    pub bootstrap: BootstrapConfig,
    pub n_shuffles: usize,
    pub alpha: f64,
    pub first_difference: bool,
    /// Test over every date instead of stopping at the split boundary.
    pub full_window: bool,
    /// Rolling volatility window in days.
    pub window: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let a = AnalysisConfig::default();
        AnalysisSection {
            max_lag: a.max_lag,
            bootstrap: a.bootstrap,
            n_shuffles: a.n_shuffles,
            alpha: a.alpha,
            first_difference: a.first_difference,
            full_window: false,
            window: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub arity: usize,
    pub discretization: PreprocessConfig,
    pub models: Vec<ModelKind>,
    pub targets: Vec<Target>,
    /// Replaces the selected-emotion features of `svm_es` per target.
    pub features: BTreeMap<Target, Vec<FeatureEntry>>,
    pub svm: SvmParams,
    pub logreg: LogRegParams,
    /// Cross-validate on the training rows during `evaluate`.
    pub cv: Option<CvConfig>,
    /// Pick SVM `C` and `gamma` by cross-validation before training.
    pub grid_search: bool,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            arity: 3,
            discretization: PreprocessConfig::default(),
            models: ModelKind::ALL.to_vec(),
            targets: Target::ALL.to_vec(),
            features: BTreeMap::new(),
            svm: SvmParams::default(),
            logreg: LogRegParams::default(),
            cv: None,
            grid_search: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    pub model: ModelKind,
}

impl Default for PredictSection {
    fn default() -> Self {
        PredictSection { model: ModelKind::SvmEs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub keywords: KeywordSet,
    pub study: Study,
    /// Last training date; later sessions are held out.
    pub split_boundary: NaiveDate,
    pub classifier: ClassifierSection,
    pub flevels: FLevelThresholds,
    /// Investor segment whose series feeds analysis and training.
    pub segment: InvestorSegment,
    pub analysis: AnalysisSection,
    pub training: TrainingSection,
    pub predict: PredictSection,
    pub synth: SynthConfig,
    pub base_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            paths: Paths::default(),
            keywords: KeywordSet::default(),
            study: Study::default(),
            split_boundary: default_split_boundary(),
            classifier: ClassifierSection::default(),
            flevels: FLevelThresholds::default(),
            segment: InvestorSegment::All,
            analysis: AnalysisSection::default(),
            training: TrainingSection::default(),
            predict: PredictSection::default(),
            synth: SynthConfig::default(),
            base_seed: 42,
        }
    }
}

fn check(ok: bool, field: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{field}`: {msg}")))
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: PipelineConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("`{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.study.start <= self.study.end, "study", "start is after end")?;
        check(
            (self.study.start..=self.study.end).contains(&self.split_boundary),
            "split_boundary",
            "must lie inside the study period",
        )?;
        check(
            self.classifier.smoothing_alpha > 0.0,
            "classifier.smoothing_alpha",
            "must be positive",
        )?;
        check(
            (0.0..1.0).contains(&self.classifier.heldout_fraction),
            "classifier.heldout_fraction",
            "must be in [0, 1)",
        )?;
        check(
            self.flevels.low < self.flevels.high,
            "flevels",
            "low must be below high",
        )?;
        let a = &self.analysis;
        check((1..=5).contains(&a.max_lag), "analysis.max_lag", "must be in 1..=5")?;
        check(a.alpha > 0.0 && a.alpha < 1.0, "analysis.alpha", "must be in (0, 1)")?;
        check(a.window >= 2, "analysis.window", "must be at least 2")?;
        check(
            a.bootstrap.n_resamples > 0 && a.bootstrap.sample_size > 1,
            "analysis.bootstrap",
            "needs at least one resample of at least two pairs",
        )?;
        let t = &self.training;
        check(t.arity == 2 || t.arity == 3, "training.arity", "must be 2 or 3")?;
        check(
            t.arity == 3 || !t.targets.contains(&Target::Volume),
            "training.targets",
            "volume has no two-class labels; drop it or use arity 3",
        )?;
        check(!t.models.is_empty(), "training.models", "must not be empty")?;
        check(!t.targets.is_empty(), "training.targets", "must not be empty")?;
        check(t.svm.c > 0.0, "training.svm.c", "must be positive")?;
        check(t.logreg.l2_penalty >= 0.0, "training.logreg.l2_penalty", "must be non-negative")?;
        if let Some(cv) = &t.cv {
            check(cv.k >= 2, "training.cv.k", "must be at least 2")?;
        }
        for (target, entries) in &t.features {
            emostock::models::FeatureSpec::new(entries.clone(), *target, t.arity)
                .map_err(|e| CliError::Config(format!("`training.features.{target}`: {e}")))?;
        }
        check(
            (1..=5).contains(&self.synth.planted_lag),
            "synth.planted_lag",
            "must be in 1..=5",
        )?;
        Ok(())
    }

    /// The analysis settings with the window cut at the split boundary.
    pub fn analysis_config(&self) -> AnalysisConfig {
        let a = &self.analysis;
        AnalysisConfig {
            max_lag: a.max_lag,
            bootstrap: a.bootstrap,
            n_shuffles: a.n_shuffles,
            alpha: a.alpha,
            first_difference: a.first_difference,
            window_end: if a.full_window { None } else { Some(self.split_boundary) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = PipelineConfig::default();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_json(&json).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let err = PipelineConfig::from_json(r#"{"training": {"svm": {"c": "big"}}}"#).unwrap_err();
        assert!(err.to_string().contains("training.svm.c"), "{err}");
        let err = PipelineConfig::from_json(r#"{"analysis": {"max_lagg": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("analysis"), "{err}");
        let err = PipelineConfig::from_json(r#"{"analysis": {"max_lag": 9}}"#).unwrap_err();
        assert!(err.to_string().contains("analysis.max_lag"), "{err}");
        let err = PipelineConfig::from_json(r#"{"training": {"arity": 2}}"#).unwrap_err();
        assert!(err.to_string().contains("training.targets"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn feature_overrides_parse() {
        let cfg = PipelineConfig::from_json(
            r#"{"training": {"features": {"close": [{"source": "disgust", "lag": 2}]}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.training.features[&Target::Close].len(), 1);
        assert!(PipelineConfig::from_json(r#"{"training": {"features": {"close": [{"source": "disgust", "lag": 7}]}}}"#).is_err());
    }
}
