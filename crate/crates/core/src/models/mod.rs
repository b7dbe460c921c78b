//! Lagged-feature datasets and the classifiers trained on them.

pub mod cv;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod logreg;
pub mod persist;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, select_svm_params, CvConfig, FoldScheme, GridPoint};
pub use dataset::{assemble, build_datasets, Dataset, PreprocessConfig, Prepared, Preprocessor, RawDataset};
pub use eval::{confusion_matrix, evaluate_holdout, render_accuracy_table, EvalReport};
pub use features::{all_emotions_spec, svmes_feature_spec, svmmr_feature_spec, FeatureEntry, FeatureSource, FeatureSpec};
pub use logreg::{logreg_train, LogRegModel, LogRegParams};
pub use persist::{load_model, save_model, ModelFile, MODEL_FILE_VERSION};
pub use svm::{svm_train, Kernel, SvmModel, SvmParams};

use crate::market::Target;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid feature spec: {0}")]
    Spec(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("training data has a single class ({0:?})")]
    SingleClass(Option<i8>),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Classifier families: logistic regression and SVM on all 25 emotion
/// features, SVM on the per-target selected emotions, and SVM on past
/// returns only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lr,
    Svm,
    SvmEs,
    SvmMr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Lr, ModelKind::Svm, ModelKind::SvmEs, ModelKind::SvmMr];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
            ModelKind::SvmEs => "svm_es",
            ModelKind::SvmMr => "svm_mr",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Lr => "LR",
            ModelKind::Svm => "SVM",
            ModelKind::SvmEs => "SVM-ES",
            ModelKind::SvmMr => "SVM-MR",
        }
    }

    /// The default feature spec this kind trains on.
    pub fn default_spec(self, target: Target, arity: usize) -> Result<FeatureSpec, ModelError> {
        match self {
            ModelKind::Lr | ModelKind::Svm => all_emotions_spec(target, arity),
            ModelKind::SvmEs => svmes_feature_spec(target, arity),
            ModelKind::SvmMr => svmmr_feature_spec(target, arity),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model kind `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default)]
    pub svm: SvmParams,
    #[serde(default)]
    pub logreg: LogRegParams,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            svm: SvmParams::default(),
            logreg: LogRegParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrainedModel {
    Svm(SvmModel),
    LogReg(LogRegModel),
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Result<i8, ModelError> {
        match self {
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::LogReg(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<i8>, ModelError> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn converged(&self) -> bool {
        match self {
            TrainedModel::Svm(m) => m.converged(),
            TrainedModel::LogReg(m) => m.converged,
        }
    }
}

pub fn train_model(data: &Dataset, cfg: &ModelConfig) -> Result<TrainedModel, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyDataset("no training rows".into()));
    }
    Ok(match cfg.kind {
        ModelKind::Lr => TrainedModel::LogReg(logreg_train(data, &cfg.logreg)?),
        _ => TrainedModel::Svm(svm_train(data, &cfg.svm)?),
    })
}
