//! Raw posts in, stock-relevant posts out.

use serde::Serialize;

use emostock::corpus::{filter_stock_relevant, parse_tweets, write_tweets};

use super::{INGEST_REPORT, RELEVANT};
use crate::error::{CliError, Result};
use crate::workspace::Workspace;

#[derive(Serialize)]
struct IngestReport<'a> {
    total: usize,
    skipped_lines: usize,
    relevant: usize,
    keywords: &'a [String],
}

pub fn run(ws: &Workspace) -> Result<()> {
    let mut run = ws.run("ingest");
    let bytes = run.read("tweets", &ws.resolve(&ws.cfg.paths.tweets), None)?;
    let parsed = parse_tweets(bytes.as_slice())?;
    let relevant = filter_stock_relevant(&parsed.records, &ws.cfg.keywords);
    if relevant.is_empty() {
        return Err(CliError::Data(format!(
            "none of the {} posts mention a stock keyword",
            parsed.records.len()
        )));
    }
    let mut out = Vec::new();
    write_tweets(&mut out, &relevant).map_err(|e| CliError::io("serializing posts", e))?;
    run.write(&ws.artifact(RELEVANT), &out)?;
    run.write_json(
        &ws.artifact(INGEST_REPORT),
        &IngestReport {
            total: parsed.records.len(),
            skipped_lines: parsed.skipped,
            relevant: relevant.len(),
            keywords: ws.cfg.keywords.keywords(),
        },
    )?;
    log::info!("{} of {} posts are stock-relevant", relevant.len(), parsed.records.len());
    run.finish()?;
    Ok(())
}
