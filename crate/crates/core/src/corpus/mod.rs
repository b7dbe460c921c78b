//! Tweet ingestion, stock-keyword filtering and the five-emotion Naive Bayes
//! classifier.

mod bayes;
mod tokenize;
mod tweet;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use bayes::{FitError, MultinomialNb};
pub use tokenize::{tokenize, Tokenizer};
pub use tweet::{
    civil_offset, filter_stock_relevant, parse_tweets, write_tweets, Gender, KeywordSet,
    ParsedTweets, TweetRecord,
};

use crate::Emotion;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("corpus format error: {skipped} of {total} lines malformed")]
    Format { skipped: usize, total: usize },
    #[error("invalid keyword set: {0}")]
    Keywords(String),
    #[error("training error: no labeled records for class `{0}`")]
    EmptyClass(Emotion),
    #[error("training error: record `{0}` has no label")]
    Unlabeled(String),
    #[error("training error: smoothing alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("held-out set is empty")]
    EmptyHeldout,
    #[error("model file: {0}")]
    ModelFile(String),
}

/// A trained five-emotion classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmotionModel {
    pub format_version: u32,
    pub tokenizer: Tokenizer,
    #[serde(flatten)]
    pub nb: MultinomialNb,
}

impl EmotionModel {
    pub fn smoothing_alpha(&self) -> f64 {
        self.nb.smoothing_alpha
    }

    pub fn save<W: Write>(&self, writer: W) -> Result<(), CorpusError> {
        serde_json::to_writer(writer, self).map_err(|e| CorpusError::ModelFile(e.to_string()))
    }

    pub fn load<R: Read>(reader: R) -> Result<Self, CorpusError> {
        let model: EmotionModel =
            serde_json::from_reader(reader).map_err(|e| CorpusError::ModelFile(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(CorpusError::ModelFile(format!(
                "unsupported format_version {}",
                model.format_version
            )));
        }
        if model.nb.n_classes() != Emotion::COUNT {
            return Err(CorpusError::ModelFile("expected five classes".into()));
        }
        Ok(model)
    }
}

pub fn train_classifier(
    labeled: &[TweetRecord],
    smoothing_alpha: f64,
    tokenizer: Tokenizer,
) -> Result<EmotionModel, CorpusError> {
    let docs = labeled
        .iter()
        .map(|r| {
            let label = r.label.ok_or_else(|| CorpusError::Unlabeled(r.id.clone()))?;
            Ok((tokenize(&r.text, tokenizer), label.index()))
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    let nb = MultinomialNb::fit(
        docs.iter().map(|(t, c)| (t.as_slice(), *c)),
        Emotion::COUNT,
        smoothing_alpha,
    )
    .map_err(|e| match e {
        FitError::EmptyClass(i) => CorpusError::EmptyClass(Emotion::ALL[i]),
        FitError::BadAlpha(a) => CorpusError::BadAlpha(a),
    })?;
    Ok(EmotionModel {
        format_version: MODEL_FORMAT_VERSION,
        tokenizer,
        nb,
    })
}

/// Most probable emotion and the full posterior. A text with no known
/// tokens is assigned the argmax of the class priors.
pub fn classify_tweet(model: &EmotionModel, text: &str) -> (Emotion, [f64; 5]) {
    let (class, post) = model.nb.predict(&tokenize(text, model.tokenizer));
    let mut out = [0.0; 5];
    out.copy_from_slice(&post);
    (Emotion::ALL[class], out)
}

/// Fraction of labeled records whose predicted class equals the label.
pub fn evaluate_classifier(model: &EmotionModel, heldout: &[TweetRecord]) -> Result<f64, CorpusError> {
    if heldout.is_empty() {
        return Err(CorpusError::EmptyHeldout);
    }
    let mut correct = 0usize;
    for r in heldout {
        let label = r.label.ok_or_else(|| CorpusError::Unlabeled(r.id.clone()))?;
        if classify_tweet(model, &r.text).0 == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / heldout.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn labeled(id: usize, text: &str, label: Emotion) -> TweetRecord {
        TweetRecord {
            id: id.to_string(),
            timestamp: civil_offset().with_ymd_and_hms(2015, 1, 5, 12, 0, 0).unwrap(),
            text: text.into(),
            followers: 5,
            gender: Gender::Unknown,
            label: Some(label),
        }
    }

    /// Each class uses its own disjoint character set.
    fn disjoint_corpus() -> Vec<TweetRecord> {
        let vocab = ["怒恨", "厌恶", "喜乐", "悲伤", "恐惧"];
        let mut out = Vec::new();
        for (c, e) in Emotion::ALL.iter().enumerate() {
            for k in 0..4 {
                let text: String = vocab[c].repeat(k + 1);
                out.push(labeled(out.len(), &text, *e));
            }
        }
        out
    }

    #[test]
    fn disjoint_vocabulary_is_separable() {
        let corpus = disjoint_corpus();
        let model = train_classifier(&corpus, 1.0, Tokenizer::CharBigram).unwrap();
        assert_eq!(evaluate_classifier(&model, &corpus).unwrap(), 1.0);
        for r in &corpus {
            assert_eq!(classify_tweet(&model, &r.text).0, r.label.unwrap());
        }
    }

    #[test]
    fn training_is_deterministic_and_order_insensitive() {
        let corpus = disjoint_corpus();
        let a = train_classifier(&corpus, 1.0, Tokenizer::CharBigram).unwrap();
        let mut rev = corpus.clone();
        rev.reverse();
        let b = train_classifier(&rev, 1.0, Tokenizer::CharBigram).unwrap();
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        a.save(&mut ja).unwrap();
        b.save(&mut jb).unwrap();
        assert_eq!(ja, jb);
        assert_eq!(EmotionModel::load(ja.as_slice()).unwrap(), a);
    }

    #[test]
    fn missing_class_is_named() {
        let corpus: Vec<_> = disjoint_corpus()
            .into_iter()
            .filter(|r| r.label != Some(Emotion::Sadness))
            .collect();
        let err = train_classifier(&corpus, 1.0, Tokenizer::CharBigram).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyClass(Emotion::Sadness)));
        assert!(err.to_string().contains("sadness"));
    }

    #[test]
    fn uniform_model_is_chance_level() {
        // Identical documents in every class: every posterior is uniform and
        // the tie-break always picks anger.
        let mut corpus = Vec::new();
        for e in Emotion::ALL {
            for _ in 0..10 {
                corpus.push(labeled(corpus.len(), "同样的话", e));
            }
        }
        let model = train_classifier(&corpus, 1.0, Tokenizer::CharBigram).unwrap();
        let (label, post) = classify_tweet(&model, "同样的话");
        assert_eq!(label, Emotion::Anger);
        assert!(post.iter().all(|p| (p - 0.2).abs() < 1e-12));
        let acc = evaluate_classifier(&model, &corpus).unwrap();
        assert!((acc - 0.2).abs() < 1e-12);
    }

    #[test]
    fn unknown_text_gets_prior_argmax() {
        let mut corpus = disjoint_corpus();
        corpus.push(labeled(99, "喜乐喜乐喜乐", Emotion::Joy));
        let model = train_classifier(&corpus, 1.0, Tokenizer::CharBigram).unwrap();
        let (label, post) = classify_tweet(&model, "xyz");
        assert_eq!(label, Emotion::Joy);
        assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evaluation_edge_cases() {
        let corpus = disjoint_corpus();
        let model = train_classifier(&corpus, 1.0, Tokenizer::CharBigram).unwrap();
        assert!(matches!(
            evaluate_classifier(&model, &[]),
            Err(CorpusError::EmptyHeldout)
        ));
        assert_eq!(evaluate_classifier(&model, &corpus[..1]).unwrap(), 1.0);
    }

    #[test]
    fn load_rejects_wrong_version() {
        let model = train_classifier(&disjoint_corpus(), 1.0, Tokenizer::CharBigram).unwrap();
        let mut v = serde_json::to_value(&model).unwrap();
        v["format_version"] = serde_json::json!(7);
        let bytes = serde_json::to_vec(&v).unwrap();
        assert!(EmotionModel::load(bytes.as_slice()).is_err());
    }
}
