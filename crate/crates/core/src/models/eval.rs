use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::{ModelError, ModelKind, TrainedModel};
use crate::market::Target;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: Target,
    pub model: ModelKind,
    pub arity: usize,
    /// Correct predictions over all scored rows.
    pub accuracy: f64,
    pub classes: Vec<i8>,
    /// `confusion[true][predicted]`, indexed like `classes`.
    pub confusion: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fold_accuracies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_fold_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_folds: Vec<usize>,
    pub period: Option<(NaiveDate, NaiveDate)>,
}

impl EvalReport {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.confusion.len()).map(|i| self.confusion[i][i]).sum()
    }
}

pub fn confusion_matrix(classes: &[i8], truth: &[i8], predicted: &[i8]) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; classes.len()]; classes.len()];
    let idx = |c: i8| classes.iter().position(|x| *x == c).expect("label outside class set");
    for (t, p) in truth.iter().zip(predicted) {
        m[idx(*t)][idx(*p)] += 1;
    }
    m
}

pub(crate) fn accuracy_of(confusion: &[Vec<u64>]) -> f64 {
    let total: u64 = confusion.iter().flatten().sum();
    let correct: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
    correct as f64 / total as f64
}

/// Scores a fitted model on a chronological test window.
pub fn evaluate_holdout(
    model: &TrainedModel,
    test: &Dataset,
    target: Target,
    kind: ModelKind,
) -> Result<EvalReport, ModelError> {
    if test.is_empty() {
        return Err(ModelError::Argument("empty test set".into()));
    }
    let predicted = model.predict_all(&test.features)?;
    let confusion = confusion_matrix(&test.classes, &test.labels, &predicted);
    Ok(EvalReport {
        target,
        model: kind,
        arity: test.classes.len(),
        accuracy: accuracy_of(&confusion),
        classes: test.classes.clone(),
        confusion,
        fold_accuracies: Vec::new(),
        mean_fold_accuracy: None,
        skipped_folds: Vec::new(),
        period: Some((test.dates[0], test.dates[test.len() - 1])),
    })
}

/// Targets down the side, model kinds across, accuracies in percent to one
/// decimal.
pub fn render_accuracy_table(reports: &[EvalReport]) -> String {
    let kinds: BTreeSet<ModelKind> = reports.iter().map(|r| r.model).collect();
    let mut rows: Vec<(Target, usize)> = reports.iter().map(|r| (r.target, r.arity)).collect();
    rows.sort();
    rows.dedup();
    let mut out = String::new();
    let _ = write!(out, "{:<12}", "target");
    for k in &kinds {
        let _ = write!(out, "{:>10}", k.label());
    }
    out.push('\n');
    for (t, a) in rows {
        let _ = write!(out, "{:<12}", format!("{}({a})", t.name().to_uppercase()));
        for k in &kinds {
            match reports.iter().find(|r| r.target == t && r.arity == a && r.model == *k) {
                Some(r) => {
                    let _ = write!(out, "{:>9.1}%", 100.0 * r.accuracy);
                }
                None => {
                    let _ = write!(out, "{:>10}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
