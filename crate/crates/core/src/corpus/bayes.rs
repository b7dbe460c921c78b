use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Multinomial Naive Bayes over token counts with additive smoothing.
///
/// Classes are plain indices `0..n_classes`; the vocabulary is indexed in
/// sorted token order so the fitted parameters do not depend on the order
/// of the training documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    pub smoothing_alpha: f64,
    pub vocabulary: BTreeMap<String, usize>,
    pub log_priors: Vec<f64>,
    /// `log_likelihoods[class][token_index]`
    pub log_likelihoods: Vec<Vec<f64>>,
}

/// Fitting failure: the class index had no documents, or alpha was invalid.
#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    EmptyClass(usize),
    BadAlpha(f64),
}

impl MultinomialNb {
    pub fn fit<'a, I>(docs: I, n_classes: usize, smoothing_alpha: f64) -> Result<Self, FitError>
    where
        I: IntoIterator<Item = (&'a [String], usize)>,
    {
        if !(smoothing_alpha > 0.0 && smoothing_alpha.is_finite()) {
            return Err(FitError::BadAlpha(smoothing_alpha));
        }
        let mut doc_counts = vec![0u64; n_classes];
        let mut token_counts: Vec<BTreeMap<&'a str, u64>> = vec![BTreeMap::new(); n_classes];
        for (tokens, class) in docs {
            doc_counts[class] += 1;
            for t in tokens {
                *token_counts[class].entry(t.as_str()).or_default() += 1;
            }
        }
        if let Some(empty) = doc_counts.iter().position(|&c| c == 0) {
            return Err(FitError::EmptyClass(empty));
        }

        let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
        for counts in &token_counts {
            for t in counts.keys() {
                vocab.entry((*t).to_string()).or_insert(0);
            }
        }
        for (i, idx) in vocab.values_mut().enumerate() {
            *idx = i;
        }

        let n_docs: u64 = doc_counts.iter().sum();
        let log_priors = doc_counts
            .iter()
            .map(|&c| (c as f64 / n_docs as f64).ln())
            .collect();

        let v = vocab.len() as f64;
        let log_likelihoods = token_counts
            .iter()
            .map(|counts| {
                let total: u64 = counts.values().sum();
                let denom = (total as f64 + smoothing_alpha * v).ln();
                let mut row = vec![smoothing_alpha.ln() - denom; vocab.len()];
                for (t, &c) in counts {
                    row[vocab[*t]] = (c as f64 + smoothing_alpha).ln() - denom;
                }
                row
            })
            .collect();

        Ok(MultinomialNb {
            smoothing_alpha,
            vocabulary: vocab,
            log_priors,
            log_likelihoods,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.log_priors.len()
    }

    /// Normalized class posterior. Out-of-vocabulary tokens are ignored, so a
    /// text with no known tokens gets the prior.
    pub fn posterior<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut joint = self.log_priors.clone();
        for t in tokens {
            if let Some(&j) = self.vocabulary.get(t.as_ref()) {
                for (c, lj) in joint.iter_mut().enumerate() {
                    *lj += self.log_likelihoods[c][j];
                }
            }
        }
        let max = joint.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = joint.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        probs
    }

    /// Index of the largest posterior; ties go to the lowest index.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> (usize, Vec<f64>) {
        let post = self.posterior(tokens);
        (argmax_first(&post), post)
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
