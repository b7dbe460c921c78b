//! Class labels for the next session, from data known before it opens.

use chrono::{Days, NaiveDate};
use serde::Serialize;

use emostock::market::{sse_sessions, Target};
use emostock::models::{dataset::source_value, ModelKind};

use super::train::{load_inputs, load_model_file};
use super::{class_name, PREDICTIONS};
use crate::error::{CliError, Result};
use crate::workspace::Workspace;

#[derive(Serialize)]
struct Prediction {
    target: Target,
    class: i8,
    label: &'static str,
    features: Vec<FeatureValue>,
}

#[derive(Serialize)]
struct FeatureValue {
    name: String,
    value: f64,
}

#[derive(Serialize)]
struct PredictionReport {
    date: NaiveDate,
    last_session: NaiveDate,
    model: ModelKind,
    predictions: Vec<Prediction>,
}

/// The first weekday after `last` that is not a listed exchange closure.
pub fn next_session(last: NaiveDate) -> NaiveDate {
    let from = last + Days::new(1);
    sse_sessions(from, last + Days::new(30))
        .first()
        .copied()
        .unwrap_or(from)
}

pub fn run(ws: &Workspace, date: Option<NaiveDate>) -> Result<()> {
    let mut run = ws.run("predict");
    let inputs = load_inputs(&mut run, ws)?;
    let days = inputs.calendar.days();
    let last = *days
        .last()
        .ok_or_else(|| CliError::Data("the trading calendar is empty".into()))?;
    let date = date.unwrap_or_else(|| next_session(last));
    if date <= last {
        return Err(CliError::Config(format!(
            "prediction date {date} is not after the last session {last}"
        )));
    }
    let kind = ws.cfg.predict.model;
    let mut predictions = Vec::new();
    for &target in &ws.cfg.training.targets {
        let file = load_model_file(&mut run, ws, kind, target)?;
        let mut row = Vec::new();
        let mut named = Vec::new();
        for (entry, name) in file.spec.entries().iter().zip(file.spec.names()) {
            // the predicted session sits one past the end of the calendar
            let source_day = *days
                .len()
                .checked_sub(entry.lag)
                .and_then(|i| days.get(i))
                .ok_or_else(|| CliError::Data(format!("{name}: calendar shorter than the lag")))?;
            let v = source_value(entry.source, source_day, &inputs.series, &inputs.targets)
                .ok_or_else(|| CliError::Data(format!("{name}: no value on {source_day}")))?;
            row.push(v);
            named.push(FeatureValue { name, value: v });
        }
        let class = file.model.predict(&file.preprocessor.scale_row(&row))?;
        predictions.push(Prediction {
            target,
            class,
            label: class_name(target, file.spec.arity(), class),
            features: named,
        });
    }
    run.write_json(
        &ws.artifact(PREDICTIONS),
        &PredictionReport {
            date,
            last_session: last,
            model: kind,
            predictions,
        },
    )?;
    run.finish()?;
    Ok(())
}
