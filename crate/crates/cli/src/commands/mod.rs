//! One module per subcommand, plus the artifact layout they share.

pub mod analyze;
pub mod classify;
pub mod ingest;
pub mod market;
pub mod predict;
pub mod series;
pub mod synth;
pub mod train;

use chrono::NaiveDate;

use emostock::investors::InvestorSegment;
use emostock::market::{read_targets_csv, Target, TargetSeries};
use emostock::models::ModelKind;
use emostock::series::{read_emotion_csv, EmotionSeries, TradingCalendar};

use crate::error::{CliError, Result};
use crate::workspace::{Run, Workspace};

pub const RELEVANT: &str = "corpus/relevant.jsonl";
pub const INGEST_REPORT: &str = "corpus/ingest.json";
pub const EMOTION_MODEL: &str = "corpus/emotion_model.json";
pub const CLASSIFIED: &str = "corpus/classified.jsonl";
pub const CLASSIFIER_REPORT: &str = "corpus/classifier_report.json";
pub const TARGETS: &str = "market/targets.csv";
pub const CALENDAR: &str = "market/calendar.csv";
pub const CORRELATION: &str = "analysis/correlation.csv";
pub const GRANGER: &str = "analysis/granger.csv";
pub const VOLATILITY: &str = "analysis/volatility.csv";
pub const ROLLING_VOLATILITY: &str = "analysis/rolling_volatility.csv";
pub const TRAIN_SUMMARY: &str = "models/summary.json";
pub const EVAL_REPORT: &str = "reports/eval.json";
pub const ACCURACY_TABLE: &str = "reports/accuracy_table.txt";
pub const CV_REPORT: &str = "reports/cv.json";
pub const CV_TABLE: &str = "reports/cv_table.txt";
pub const PREDICTIONS: &str = "reports/predictions.json";
pub const GROUND_TRUTH: &str = "synth/ground_truth.json";

pub fn series_file(seg: InvestorSegment) -> String {
    format!("series/emotions_{seg}.csv")
}

pub fn model_files(kind: ModelKind, target: Target) -> (String, String) {
    let stem = format!("models/{kind}_{target}");
    (format!("{stem}.json"), format!("{stem}.bin"))
}

pub fn load_calendar(run: &mut Run, ws: &Workspace) -> Result<TradingCalendar> {
    let text = run.read_string("calendar", &ws.artifact(CALENDAR), Some("market"))?;
    let days = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<NaiveDate>()
                .map_err(|e| CliError::Data(format!("{CALENDAR}: `{l}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradingCalendar::new(days)?)
}

pub fn write_calendar(run: &mut Run, ws: &Workspace, cal: &TradingCalendar) -> Result<()> {
    let mut text = String::from("date\n");
    for d in cal.days() {
        text.push_str(&d.to_string());
        text.push('\n');
    }
    run.write(&ws.artifact(CALENDAR), text.as_bytes())
}

pub fn load_targets(run: &mut Run, ws: &Workspace) -> Result<TargetSeries> {
    let bytes = run.read("targets", &ws.artifact(TARGETS), Some("market"))?;
    Ok(read_targets_csv(bytes.as_slice())?)
}

pub fn load_series(run: &mut Run, ws: &Workspace, seg: InvestorSegment) -> Result<EmotionSeries> {
    let name = format!("{seg} emotion series");
    let bytes = run.read(&name, &ws.artifact(&series_file(seg)), Some("build-series"))?;
    Ok(read_emotion_csv(bytes.as_slice(), Some(seg))?)
}

/// Human-readable name of a class label.
pub fn class_name(target: Target, arity: usize, label: i8) -> &'static str {
    match (arity, target, label) {
        (2, _, 1) => "up",
        (2, _, _) => "down",
        (_, Target::Volume, -1) => "low",
        (_, Target::Volume, 0) => "normal",
        (_, Target::Volume, _) => "high",
        (_, _, -1) => "bearish",
        (_, _, 0) => "stable",
        _ => "bullish",
    }
}

pub fn csv_error(e: csv::Error) -> CliError {
    CliError::Data(e.to_string())
}
