//! Correlation and causality grids, and investor emotional volatility.

use emostock::investors::{
    compute_rjf, rolling_volatility, volatility, write_rolling_report, write_segment_report, InvestorSegment,
    SegmentVolatility,
};
use emostock::series::restrict_to_calendar;
use emostock::stats::{analyze_grid, AnalysisRow};

use super::{
    csv_error, load_calendar, load_series, load_targets, series_file, CORRELATION, GRANGER, ROLLING_VOLATILITY,
    VOLATILITY,
};
use crate::error::{CliError, Result};
use crate::plot::line_chart;
use crate::workspace::{Run, Workspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Analysis {
    Corr,
    Granger,
    Volatility,
    All,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn correlation_csv(rows: &[AnalysisRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "emotion", "lag", "target", "n_pairs", "rho", "boot_mean", "boot_std", "shuffle_mean", "shuffle_std", "notes",
    ])
    .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.emotion.to_string(),
            r.lag.to_string(),
            r.target.to_string(),
            r.n_pairs.to_string(),
            opt(r.rho),
            opt(r.boot_mean),
            opt(r.boot_std),
            opt(r.shuffle_mean),
            opt(r.shuffle_std),
            notes(r, &["correlation", "bootstrap", "shuffle"]),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

fn granger_csv(rows: &[AnalysisRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "emotion", "lag", "target", "n_obs", "f_stat", "p_value", "df_num", "df_den", "significant", "stars", "notes",
    ])
    .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.emotion.to_string(),
            r.lag.to_string(),
            r.target.to_string(),
            r.granger_n_obs.to_string(),
            opt(r.f_stat),
            opt(r.p_value),
            r.df_num.to_string(),
            r.df_den.to_string(),
            r.significant.to_string(),
            r.stars.clone(),
            notes(r, &["granger"]),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

fn notes(r: &AnalysisRow, prefixes: &[&str]) -> String {
    r.notes
        .iter()
        .filter(|n| prefixes.iter().any(|p| n.starts_with(p)))
        .cloned()
        .collect::<Vec<_>>()
        .join("; ")
}

fn grid(run: &mut Run, ws: &Workspace) -> Result<Vec<AnalysisRow>> {
    let calendar = load_calendar(run, ws)?;
    let targets = load_targets(run, ws)?;
    let series = restrict_to_calendar(&load_series(run, ws, ws.cfg.segment)?, &calendar);
    run.seed("analysis", ws.seed);
    Ok(analyze_grid(&series, &targets, &calendar, &ws.cfg.analysis_config(), ws.seed))
}

fn run_volatility(run: &mut Run, ws: &Workspace) -> Result<()> {
    let window = ws.cfg.analysis.window;
    let mut summary = Vec::new();
    let mut rolling = Vec::new();
    for seg in InvestorSegment::ALL {
        let path = ws.artifact(&series_file(seg));
        if seg != InvestorSegment::All && !path.is_file() {
            log::warn!("no series for segment {seg}; skipped");
            continue;
        }
        let rjf = compute_rjf(&load_series(run, ws, seg)?);
        match volatility(&rjf) {
            Ok(v) => summary.push(SegmentVolatility {
                segment: seg,
                mu: v.mu,
                sigma: v.sigma,
                n: v.n,
                excluded_days: rjf.excluded,
            }),
            Err(e) => log::warn!("segment {seg}: {e}"),
        }
        match rolling_volatility(&rjf, window) {
            Ok(r) => rolling.push((seg, r)),
            Err(e) => log::warn!("segment {seg} rolling volatility: {e}"),
        }
    }
    if summary.is_empty() {
        return Err(CliError::Data("no segment has enough days for a volatility estimate".into()));
    }
    let mut out = Vec::new();
    write_segment_report(&mut out, &summary)?;
    run.write(&ws.artifact(VOLATILITY), &out)?;
    let mut out = Vec::new();
    write_rolling_report(&mut out, &rolling)?;
    run.write(&ws.artifact(ROLLING_VOLATILITY), &out)?;

    if ws.plot {
        if let Some((_, first)) = rolling.iter().find(|(s, _)| *s == InvestorSegment::All) {
            let lines: Vec<(&str, Vec<f64>)> =
                rolling.iter().map(|(s, r)| (s.name(), r.iter().map(|x| x.1).collect())).collect();
            let svg = line_chart(
                &format!("Rolling {window}-day joy/fear volatility"),
                (&first[0].0.to_string(), &first[first.len() - 1].0.to_string()),
                &lines,
            );
            run.write(&ws.artifact("analysis/rolling_volatility.svg"), svg.as_bytes())?;
        }
    }
    Ok(())
}

pub fn run(ws: &Workspace, what: Analysis) -> Result<()> {
    let mut run = ws.run("analyze");
    if what != Analysis::Volatility {
        let rows = grid(&mut run, ws)?;
        if matches!(what, Analysis::Corr | Analysis::All) {
            let bytes = correlation_csv(&rows)?;
            run.write(&ws.artifact(CORRELATION), &bytes)?;
        }
        if matches!(what, Analysis::Granger | Analysis::All) {
            let bytes = granger_csv(&rows)?;
            run.write(&ws.artifact(GRANGER), &bytes)?;
            let significant = rows.iter().filter(|r| r.significant).count();
            log::info!("{significant} of {} Granger cells significant", rows.len());
        }
    }
    if matches!(what, Analysis::Volatility | Analysis::All) {
        run_volatility(&mut run, ws)?;
    }
    run.finish()?;
    Ok(())
}
