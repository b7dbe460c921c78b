//! Trains the emotion classifier and labels every stock-relevant post.

use std::collections::BTreeMap;

use serde::Serialize;

use emostock::corpus::{classify_tweet, evaluate_classifier, parse_tweets, train_classifier, write_tweets};
use emostock::rng::{derive_seed, stage};
use emostock::Emotion;

use super::{CLASSIFIED, CLASSIFIER_REPORT, EMOTION_MODEL, RELEVANT};
use crate::error::{CliError, Result};
use crate::workspace::Workspace;

#[derive(Serialize)]
struct ClassifierReport {
    labeled: usize,
    heldout: usize,
    heldout_accuracy: Option<f64>,
    classified: usize,
    counts: BTreeMap<Emotion, usize>,
}

pub fn run(ws: &Workspace) -> Result<()> {
    let mut run = ws.run("classify");
    let cfg = &ws.cfg.classifier;
    let bytes = run.read("labeled posts", &ws.resolve(&ws.cfg.paths.labeled), None)?;
    let labeled = parse_tweets(bytes.as_slice())?.records;

    let split_seed = run.seed("classifier_split", derive_seed(ws.seed, &[stage::CLASSIFIER_SPLIT]));
    let (heldout, fit): (Vec<_>, Vec<_>) = labeled.iter().cloned().enumerate().partition(|(i, _)| {
        let u = (derive_seed(split_seed, &[*i as u64]) >> 11) as f64 / (1u64 << 53) as f64;
        u < cfg.heldout_fraction
    });
    let heldout: Vec<_> = heldout.into_iter().map(|(_, r)| r).collect();
    let fit: Vec<_> = fit.into_iter().map(|(_, r)| r).collect();
    let heldout_accuracy = if heldout.is_empty() {
        None
    } else {
        let probe = train_classifier(&fit, cfg.smoothing_alpha, cfg.tokenizer)?;
        Some(evaluate_classifier(&probe, &heldout)?)
    };
    let model = train_classifier(&labeled, cfg.smoothing_alpha, cfg.tokenizer)?;
    let mut model_bytes = Vec::new();
    model.save(&mut model_bytes)?;
    model_bytes.push(b'\n');
    run.write(&ws.artifact(EMOTION_MODEL), &model_bytes)?;

    let relevant_bytes = run.read("stock-relevant posts", &ws.artifact(RELEVANT), Some("ingest"))?;
    let mut posts = parse_tweets(relevant_bytes.as_slice())?.records;
    let mut counts: BTreeMap<Emotion, usize> = Emotion::ALL.iter().map(|e| (*e, 0)).collect();
    for p in &mut posts {
        let e = classify_tweet(&model, &p.text).0;
        p.label = Some(e);
        *counts.entry(e).or_default() += 1;
    }
    let mut out = Vec::new();
    write_tweets(&mut out, &posts).map_err(|e| CliError::io("serializing posts", e))?;
    run.write(&ws.artifact(CLASSIFIED), &out)?;
    run.write_json(
        &ws.artifact(CLASSIFIER_REPORT),
        &ClassifierReport {
            labeled: labeled.len(),
            heldout: heldout.len(),
            heldout_accuracy,
            classified: posts.len(),
            counts,
        },
    )?;
    run.finish()?;
    Ok(())
}
