//! Index prices in, daily percent changes and the session calendar out.

use emostock::market::{parse_market_csv, rate_of_change_targets, write_targets_csv, Target};

use super::{write_calendar, TARGETS};
use crate::error::{CliError, Result};
use crate::plot::line_chart;
use crate::workspace::Workspace;

pub fn run(ws: &Workspace) -> Result<()> {
    let mut run = ws.run("market");
    let bytes = run.read("market prices", &ws.resolve(&ws.cfg.paths.market), None)?;
    let (days, calendar) = parse_market_csv(bytes.as_slice())?;
    let study = &ws.cfg.study;
    if let Some(expected) = study.sessions {
        let found = days.iter().filter(|d| (study.start..=study.end).contains(&d.date)).count();
        if found != expected {
            return Err(CliError::Data(format!(
                "expected {expected} sessions between {} and {}, found {found}",
                study.start, study.end
            )));
        }
    }
    let targets = rate_of_change_targets(&days)?;
    let mut out = Vec::new();
    write_targets_csv(&mut out, &targets)?;
    run.write(&ws.artifact(TARGETS), &out)?;
    write_calendar(&mut run, ws, &calendar)?;

    if ws.plot && !targets.is_empty() {
        let dates = targets.dates();
        let lines: Vec<(&str, Vec<f64>)> = [Target::Close, Target::Open, Target::High, Target::Low]
            .iter()
            .map(|t| (t.name(), targets.values(*t)))
            .collect();
        let svg = line_chart(
            "Daily percent changes",
            (&dates[0].to_string(), &dates[dates.len() - 1].to_string()),
            &lines,
        );
        run.write(&ws.artifact("market/targets.svg"), svg.as_bytes())?;
    }
    run.finish()?;
    Ok(())
}
