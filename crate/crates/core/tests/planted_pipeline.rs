//! The library pipeline on a synthetic corpus with a planted emotion signal.

use emostock::corpus::{classify_tweet, filter_stock_relevant, train_classifier, KeywordSet, Tokenizer};
use emostock::market::{default_split_boundary, rate_of_change_targets, Target};
use emostock::models::{
    build_datasets, evaluate_holdout, train_model, FeatureEntry, FeatureSpec, ModelConfig, ModelKind,
    PreprocessConfig,
};
use emostock::series::{aggregate_daily, restrict_to_calendar, TradingCalendar};
use emostock::stats::{analyze_grid, AnalysisConfig};
use emostock::synth::{generate, SynthConfig};

struct Outcome {
    planted_p: f64,
    spurious: usize,
    non_implied: usize,
    holdout: f64,
    majority: f64,
}

fn run(coupling: f64, seed: u64) -> Outcome {
    let cfg = SynthConfig {
        coupling,
        seed,
        ..SynthConfig::default()
    };
    let out = generate(&cfg);
    let relevant = filter_stock_relevant(&out.tweets, &KeywordSet::default());
    let model = train_classifier(&out.labeled, 1.0, Tokenizer::CharBigram).unwrap();
    let classified: Vec<_> = relevant.iter().map(|t| (t, classify_tweet(&model, &t.text).0)).collect();
    let calendar = TradingCalendar::new(out.market.iter().map(|d| d.date).collect()).unwrap();
    let series = restrict_to_calendar(&aggregate_daily(classified.iter().map(|(t, e)| (*t, *e))), &calendar);
    let targets = rate_of_change_targets(&out.market).unwrap();

    let rows = analyze_grid(&series, &targets, &calendar, &AnalysisConfig::default(), seed);
    let truth = &out.truth;
    let planted_p = rows
        .iter()
        .find(|r| r.emotion == truth.planted_emotion && r.lag == truth.planted_lag && r.target == Target::Close)
        .and_then(|r| r.p_value)
        .unwrap();
    let non_implied: Vec<_> = rows
        .iter()
        .filter(|r| !truth.implied_cells.contains(&(r.emotion, r.lag, r.target)))
        .collect();
    let spurious = non_implied.iter().filter(|r| r.significant).count();

    let spec = FeatureSpec::new(
        vec![FeatureEntry::emotion(truth.planted_emotion, truth.planted_lag)],
        Target::Close,
        3,
    )
    .unwrap();
    let prepared = build_datasets(
        &spec,
        &series,
        &targets,
        &calendar,
        default_split_boundary(),
        &PreprocessConfig::default(),
        seed,
    )
    .unwrap();
    let m = train_model(&prepared.train, &ModelConfig::new(ModelKind::SvmEs)).unwrap();
    let report = evaluate_holdout(&m, &prepared.test, Target::Close, ModelKind::SvmEs).unwrap();
    let majority = prepared
        .test
        .classes
        .iter()
        .map(|c| prepared.test.labels.iter().filter(|l| *l == c).count())
        .max()
        .unwrap() as f64
        / prepared.test.len() as f64;
    Outcome {
        planted_p,
        spurious,
        non_implied: non_implied.len(),
        holdout: report.accuracy,
        majority,
    }
}

#[test]
fn planted_signal_is_recovered_and_null_is_not() {
    for seed in 0..4 {
        let o = run(1.0, seed);
        assert!(o.planted_p < 0.01, "seed {seed}: planted p {}", o.planted_p);
        assert!(
            o.spurious as f64 <= 0.1 * o.non_implied as f64,
            "seed {seed}: {} of {} other cells significant",
            o.spurious,
            o.non_implied
        );
        assert!(o.holdout >= 0.8, "seed {seed}: holdout {}", o.holdout);

        let null = run(0.0, seed);
        assert!(
            null.holdout <= null.majority + 0.1,
            "seed {seed}: null holdout {} against majority rate {}",
            null.holdout,
            null.majority
        );
    }
}
