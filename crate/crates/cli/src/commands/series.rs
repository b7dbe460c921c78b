//! Daily emotion proportions for every investor segment.

use emostock::corpus::parse_tweets;
use emostock::investors::{assign_segment, InvestorSegment};
use emostock::series::{aggregate_daily, write_emotion_csv, EmotionSeries};
use emostock::Emotion;

use super::{series_file, CLASSIFIED};
use crate::error::{CliError, Result};
use crate::plot::line_chart;
use crate::workspace::Workspace;

pub fn run(ws: &Workspace) -> Result<()> {
    let mut run = ws.run("build-series");
    let bytes = run.read("classified posts", &ws.artifact(CLASSIFIED), Some("classify"))?;
    let posts = parse_tweets(bytes.as_slice())?.records;
    let labeled: Vec<_> = posts
        .iter()
        .map(|p| {
            p.label
                .map(|e| (p, e, assign_segment(p, &ws.cfg.flevels)))
                .ok_or_else(|| CliError::Data(format!("post `{}` has no emotion label", p.id)))
        })
        .collect::<Result<_>>()?;

    for seg in InvestorSegment::ALL {
        let daily = aggregate_daily(labeled.iter().filter(|(_, _, s)| s.contains(&seg)).map(|(p, e, _)| (*p, *e)));
        if daily.is_empty() {
            log::warn!("segment {seg} has no posts; no series written");
            continue;
        }
        let series = EmotionSeries::new(daily.rows().to_vec(), Some(seg))?;
        let mut out = Vec::new();
        write_emotion_csv(&mut out, &series)?;
        run.write(&ws.artifact(&series_file(seg)), &out)?;

        if ws.plot && seg == InvestorSegment::All {
            let dates = series.dates();
            let lines: Vec<(&str, Vec<f64>)> = Emotion::ALL.iter().map(|e| (e.name(), series.column(*e))).collect();
            let svg = line_chart(
                "Daily emotion proportions",
                (&dates[0].to_string(), &dates[dates.len() - 1].to_string()),
                &lines,
            );
            run.write(&ws.artifact("series/emotions_all.svg"), svg.as_bytes())?;
        }
    }
    run.finish()?;
    Ok(())
}
