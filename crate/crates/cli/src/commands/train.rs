//! Model training, holdout evaluation and optional cross-validation.

use serde::Serialize;

use emostock::market::{Target, TargetSeries};
use emostock::models::{
    assemble, build_datasets, cross_validate, evaluate_holdout, load_model, render_accuracy_table, save_model,
    select_svm_params, train_model, CvConfig, EvalReport, FeatureSpec, GridPoint, Kernel, ModelConfig, ModelFile,
    ModelKind, TrainedModel, MODEL_FILE_VERSION,
};
use emostock::rng::{derive_seed, stage};
use emostock::series::{restrict_to_calendar, EmotionSeries, TradingCalendar};

use super::{load_calendar, load_series, load_targets, model_files, ACCURACY_TABLE, CV_REPORT, CV_TABLE, EVAL_REPORT, TRAIN_SUMMARY};
use crate::error::{CliError, Result};
use crate::workspace::{Run, Workspace};

pub struct Inputs {
    pub calendar: TradingCalendar,
    pub targets: TargetSeries,
    pub series: EmotionSeries,
}

pub fn load_inputs(run: &mut Run, ws: &Workspace) -> Result<Inputs> {
    let calendar = load_calendar(run, ws)?;
    let targets = load_targets(run, ws)?;
    let series = restrict_to_calendar(&load_series(run, ws, ws.cfg.segment)?, &calendar);
    Ok(Inputs {
        calendar,
        targets,
        series,
    })
}

pub fn feature_spec(ws: &Workspace, kind: ModelKind, target: Target) -> Result<FeatureSpec> {
    let arity = ws.cfg.training.arity;
    match ws.cfg.training.features.get(&target) {
        Some(entries) if kind == ModelKind::SvmEs => Ok(FeatureSpec::new(entries.clone(), target, arity)?),
        _ => Ok(kind.default_spec(target, arity)?),
    }
}

fn discretize_seed(run: &mut Run, ws: &Workspace, target: Target) -> u64 {
    run.seed(
        &format!("discretize.{target}"),
        derive_seed(ws.seed, &[stage::DISCRETIZE, target as u64]),
    )
}

fn cv_seed(run: &mut Run, ws: &Workspace, target: Target) -> u64 {
    run.seed(
        &format!("cv.{target}"),
        derive_seed(ws.seed, &[stage::CV_FOLDS, target as u64]),
    )
}

#[derive(Serialize)]
struct TrainSummary {
    kind: ModelKind,
    target: Target,
    features: Vec<String>,
    train_rows: usize,
    test_rows: usize,
    train_period: (chrono::NaiveDate, chrono::NaiveDate),
    class_counts: Vec<(i8, usize)>,
    converged: bool,
    kernel: Option<Kernel>,
    c: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    grid: Vec<GridPoint>,
}

pub fn run_train(ws: &Workspace) -> Result<()> {
    let mut run = ws.run("train");
    let inputs = load_inputs(&mut run, ws)?;
    let t = &ws.cfg.training;
    let mut summary = Vec::new();
    for &target in &t.targets {
        let seed = discretize_seed(&mut run, ws, target);
        for &kind in &t.models {
            let spec = feature_spec(ws, kind, target)?;
            let prepared = build_datasets(
                &spec,
                &inputs.series,
                &inputs.targets,
                &inputs.calendar,
                ws.cfg.split_boundary,
                &t.discretization,
                seed,
            )?;
            let mut cfg = ModelConfig {
                kind,
                svm: t.svm,
                logreg: t.logreg,
            };
            let mut grid = Vec::new();
            if t.grid_search && kind != ModelKind::Lr {
                let cv = t.cv.unwrap_or_default();
                let (best, points) =
                    select_svm_params(&prepared.raw_train, &t.discretization, &cfg, &cv, cv_seed(&mut run, ws, target))?;
                cfg = best;
                grid = points;
            }
            let model = train_model(&prepared.train, &cfg)?;
            if !model.converged() {
                log::warn!("{kind} for {target} stopped before convergence");
            }
            let train = &prepared.train;
            let period = (train.dates[0], train.dates[train.len() - 1]);
            let (kernel, c) = match &model {
                TrainedModel::Svm(m) => (Some(m.kernel), Some(m.c)),
                TrainedModel::LogReg(_) => (None, None),
            };
            summary.push(TrainSummary {
                kind,
                target,
                features: spec.names(),
                train_rows: train.len(),
                test_rows: prepared.test.len(),
                train_period: period,
                class_counts: train
                    .classes
                    .iter()
                    .map(|c| (*c, train.labels.iter().filter(|l| *l == c).count()))
                    .collect(),
                converged: model.converged(),
                kernel,
                c,
                grid,
            });
            let file = ModelFile {
                format_version: MODEL_FILE_VERSION,
                config: cfg,
                spec,
                preprocessor: prepared.preprocessor,
                trained_on: period,
                seed,
                model,
            };
            let (mut json, mut bin) = (Vec::new(), Vec::new());
            save_model(&file, &mut json, &mut bin)?;
            json.push(b'\n');
            let (json_path, bin_path) = model_files(kind, target);
            run.write(&ws.artifact(&json_path), &json)?;
            run.write(&ws.artifact(&bin_path), &bin)?;
        }
    }
    run.write_json(&ws.artifact(TRAIN_SUMMARY), &summary)?;
    run.finish()?;
    Ok(())
}

pub fn load_model_file(run: &mut Run, ws: &Workspace, kind: ModelKind, target: Target) -> Result<ModelFile> {
    let (json_path, bin_path) = model_files(kind, target);
    let name = format!("{kind} model for {target}");
    let json = run.read(&name, &ws.artifact(&json_path), Some("train"))?;
    let bin = run.read(&name, &ws.artifact(&bin_path), Some("train"))?;
    let file = load_model(json.as_slice(), bin.as_slice())?;
    if file.spec.target() != target || file.config.kind != kind {
        return Err(CliError::Data(format!("{json_path} holds a different model")));
    }
    Ok(file)
}

pub fn run_evaluate(ws: &Workspace) -> Result<()> {
    let mut run = ws.run("evaluate");
    let inputs = load_inputs(&mut run, ws)?;
    let t = &ws.cfg.training;
    let mut reports = Vec::new();
    let mut cv_reports = Vec::new();
    for &target in &t.targets {
        for &kind in &t.models {
            let file = load_model_file(&mut run, ws, kind, target)?;
            let raw = assemble(&file.spec, &inputs.series, &inputs.targets, &inputs.calendar)?;
            let (raw_train, raw_test) = raw.split(ws.cfg.split_boundary);
            let test = file.preprocessor.apply(&raw_test);
            reports.push(evaluate_holdout(&file.model, &test, target, kind)?);
            if let Some(cv) = &t.cv {
                cv_reports.push(cross_validated(&mut run, ws, &file, &raw_train, cv, target)?);
            }
        }
    }
    run.write_json(&ws.artifact(EVAL_REPORT), &reports)?;
    run.write(&ws.artifact(ACCURACY_TABLE), render_accuracy_table(&reports).as_bytes())?;
    if !cv_reports.is_empty() {
        run.write_json(&ws.artifact(CV_REPORT), &cv_reports)?;
        run.write(&ws.artifact(CV_TABLE), render_accuracy_table(&cv_reports).as_bytes())?;
    }
    run.finish()?;
    Ok(())
}

fn cross_validated(
    run: &mut Run,
    ws: &Workspace,
    file: &ModelFile,
    raw_train: &emostock::models::RawDataset,
    cv: &CvConfig,
    target: Target,
) -> Result<EvalReport> {
    let seed = cv_seed(run, ws, target);
    Ok(cross_validate(raw_train, &ws.cfg.training.discretization, &file.config, cv, seed)?)
}
