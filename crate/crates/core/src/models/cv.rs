use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{PreprocessConfig, Preprocessor, RawDataset};
use super::eval::{accuracy_of, confusion_matrix, EvalReport};
use super::{train_model, ModelConfig, ModelError};
use crate::rng::{derive_seed, rng_from_seed, stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldScheme {
    /// Seeded shuffle, then rows dealt round-robin into folds.
    Random,
    /// Contiguous blocks in date order.
    Chronological,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub scheme: FoldScheme,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            scheme: FoldScheme::Random,
        }
    }
}

/// Fold index of every row.
pub fn fold_assignment(n: usize, cfg: &CvConfig, seed: u64) -> Vec<usize> {
    match cfg.scheme {
        FoldScheme::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng_from_seed(derive_seed(seed, &[stage::CV_FOLDS])));
            let mut fold = vec![0; n];
            for (pos, row) in order.into_iter().enumerate() {
                fold[row] = pos % cfg.k;
            }
            fold
        }
        FoldScheme::Chronological => {
            let (base, rem) = (n / cfg.k, n % cfg.k);
            let mut fold = Vec::with_capacity(n);
            for f in 0..cfg.k {
                fold.extend(std::iter::repeat_n(f, base + usize::from(f < rem)));
            }
            fold
        }
    }
}

enum FoldResult {
    Scored { truth: Vec<i8>, predicted: Vec<i8>, accuracy: f64 },
    Skipped,
}

/// K-fold cross-validation. Scaling bounds and the target discretizer are
/// refitted on each fold's training rows; a fold whose training rows end up
/// with fewer than two classes is skipped and listed in the report.
pub fn cross_validate(
    raw: &RawDataset,
    pre: &PreprocessConfig,
    model: &ModelConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<EvalReport, ModelError> {
    if cv.k < 2 {
        return Err(ModelError::Argument("cross-validation needs k ≥ 2".into()));
    }
    if raw.len() < cv.k {
        return Err(ModelError::Argument(format!("{} rows for {} folds", raw.len(), cv.k)));
    }
    let folds = fold_assignment(raw.len(), cv, seed);
    let results: Vec<Result<FoldResult, ModelError>> = (0..cv.k)
        .into_par_iter()
        .map(|f| {
            let train_rows: Vec<usize> = (0..raw.len()).filter(|r| folds[*r] != f).collect();
            let test_rows: Vec<usize> = (0..raw.len()).filter(|r| folds[*r] == f).collect();
            let train_raw = raw.subset(&train_rows);
            let prep = match Preprocessor::fit(&train_raw, pre, derive_seed(seed, &[stage::DISCRETIZE, f as u64])) {
                Ok(p) => p,
                Err(ModelError::Degenerate(msg)) => {
                    log::warn!("fold {f} skipped: {msg}");
                    return Ok(FoldResult::Skipped);
                }
                Err(e) => return Err(e),
            };
            let train = prep.apply(&train_raw);
            if train.present_classes().len() < 2 {
                log::warn!("fold {f} skipped: training rows hold a single class");
                return Ok(FoldResult::Skipped);
            }
            let test = prep.apply(&raw.subset(&test_rows));
            let fitted = train_model(&train, model)?;
            let predicted = fitted.predict_all(&test.features)?;
            let correct = predicted.iter().zip(&test.labels).filter(|(a, b)| a == b).count();
            Ok(FoldResult::Scored {
                accuracy: correct as f64 / test.len() as f64,
                truth: test.labels,
                predicted,
            })
        })
        .collect();

    let classes = if raw.spec.arity() == 2 { vec![0, 1] } else { vec![-1, 0, 1] };
    let mut confusion = vec![vec![0u64; classes.len()]; classes.len()];
    let mut fold_accuracies = Vec::new();
    let mut skipped_folds = Vec::new();
    for (f, r) in results.into_iter().enumerate() {
        match r? {
            FoldResult::Scored {
                truth,
                predicted,
                accuracy,
            } => {
                let m = confusion_matrix(&classes, &truth, &predicted);
                for (row, add) in confusion.iter_mut().zip(m) {
                    for (c, a) in row.iter_mut().zip(add) {
                        *c += a;
                    }
                }
                fold_accuracies.push(accuracy);
            }
            FoldResult::Skipped => skipped_folds.push(f),
        }
    }
    if fold_accuracies.is_empty() {
        return Err(ModelError::Degenerate("every fold was skipped".into()));
    }
    let mean = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(EvalReport {
        target: raw.spec.target(),
        model: model.kind,
        arity: classes.len(),
        accuracy: accuracy_of(&confusion),
        classes,
        confusion,
        fold_accuracies,
        mean_fold_accuracy: Some(mean),
        skipped_folds,
        period: raw.first_date().zip(raw.last_date()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c: f64,
    pub gamma: f64,
    pub accuracy: f64,
}

pub const GRID_C: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
pub const GRID_GAMMA: [f64; 3] = [0.01, 0.1, 1.0];

/// Cross-validated search over `C` and RBF `gamma`. The best point wins;
/// ties keep the earlier grid point.
pub fn select_svm_params(
    raw: &RawDataset,
    pre: &PreprocessConfig,
    model: &ModelConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<(ModelConfig, Vec<GridPoint>), ModelError> {
    let mut grid = Vec::new();
    let mut best: Option<(f64, ModelConfig)> = None;
    for c in GRID_C {
        for gamma in GRID_GAMMA {
            let mut cfg = *model;
            cfg.svm.c = c;
            cfg.svm.kernel = Some(super::Kernel::Rbf { gamma });
            let acc = cross_validate(raw, pre, &cfg, cv, seed)?.accuracy;
            grid.push(GridPoint { c, gamma, accuracy: acc });
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, cfg));
            }
        }
    }
    Ok((best.expect("non-empty grid").1, grid))
}
