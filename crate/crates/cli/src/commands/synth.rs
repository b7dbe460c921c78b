//! Writes a synthetic corpus and market with a known emotion coupling.

use emostock::corpus::write_tweets;
use emostock::market::write_market_csv;
use emostock::synth::{generate, SynthConfig};
use emostock::Emotion;

use super::GROUND_TRUTH;
use crate::error::{CliError, Result};
use crate::workspace::Workspace;

#[derive(Clone, Debug, Default, clap::Args)]
pub struct SynthArgs {
    /// Close percent change per unit of the planted driver; 0 gives no signal.
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Session lag of the planted effect.
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub emotion: Option<Emotion>,
}

pub fn run(ws: &Workspace, args: &SynthArgs) -> Result<()> {
    let mut cfg: SynthConfig = ws.cfg.synth.clone();
    cfg.seed = ws.seed;
    if let Some(c) = args.coupling {
        cfg.coupling = c;
    }
    if let Some(l) = args.lag {
        if !(1..=5).contains(&l) {
            return Err(CliError::Config(format!("--lag must be in 1..=5, got {l}")));
        }
        cfg.planted_lag = l;
    }
    if let Some(n) = args.noise {
        cfg.noise = n;
    }
    if let Some(e) = args.emotion {
        cfg.planted_emotion = e;
    }
    let out = generate(&cfg);

    let mut run = ws.run("synth");
    run.seed("synth", cfg.seed);
    let mut tweets = Vec::new();
    write_tweets(&mut tweets, &out.tweets).map_err(|e| CliError::io("serializing posts", e))?;
    run.write(&ws.resolve(&ws.cfg.paths.tweets), &tweets)?;
    let mut labeled = Vec::new();
    write_tweets(&mut labeled, &out.labeled).map_err(|e| CliError::io("serializing posts", e))?;
    run.write(&ws.resolve(&ws.cfg.paths.labeled), &labeled)?;
    let mut market = Vec::new();
    write_market_csv(&mut market, &out.market)?;
    run.write(&ws.resolve(&ws.cfg.paths.market), &market)?;
    run.write_json(&ws.artifact(GROUND_TRUTH), &out.truth)?;
    run.finish()?;
    Ok(())
}
