use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::market::Target;
use crate::Emotion;

/// Longest lag a feature may use, in trading days.
pub const MAX_LAG: usize = 5;

/// Where a feature value comes from: a daily emotion proportion or the
/// previous sessions' close-to-close return.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureSource {
    Emotion(Emotion),
    MarketReturn,
}

impl fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSource::Emotion(e) => f.write_str(e.name()),
            FeatureSource::MarketReturn => f.write_str("market_return"),
        }
    }
}

impl FromStr for FeatureSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "market_return" {
            return Ok(FeatureSource::MarketReturn);
        }
        s.parse::<Emotion>()
            .map(FeatureSource::Emotion)
            .map_err(|_| format!("unknown feature source `{s}`"))
    }
}

impl TryFrom<String> for FeatureSource {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FeatureSource> for String {
    fn from(s: FeatureSource) -> String {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub source: FeatureSource,
    pub lag: usize,
}

impl FeatureEntry {
    pub fn emotion(e: Emotion, lag: usize) -> Self {
        FeatureEntry {
            source: FeatureSource::Emotion(e),
            lag,
        }
    }

    pub fn name(&self) -> String {
        format!("{}_lag{}", self.source, self.lag)
    }
}

/// Ordered feature columns for one target, plus the number of classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct FeatureSpec {
    entries: Vec<FeatureEntry>,
    target: Target,
    arity: usize,
}

#[derive(Deserialize)]
struct RawSpec {
    entries: Vec<FeatureEntry>,
    target: Target,
    arity: usize,
}

impl TryFrom<RawSpec> for FeatureSpec {
    type Error = ModelError;
    fn try_from(r: RawSpec) -> Result<Self, Self::Error> {
        FeatureSpec::new(r.entries, r.target, r.arity)
    }
}

impl FeatureSpec {
    pub fn new(entries: Vec<FeatureEntry>, target: Target, arity: usize) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::Spec("a feature spec needs at least one entry".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !(1..=MAX_LAG).contains(&e.lag) {
                return Err(ModelError::Spec(format!("lag {} outside 1..={MAX_LAG}", e.lag)));
            }
            if !seen.insert(*e) {
                return Err(ModelError::Spec(format!("duplicate feature {}", e.name())));
            }
        }
        if !(arity == 2 || arity == 3) {
            return Err(ModelError::Spec(format!("arity {arity} is not 2 or 3")));
        }
        if arity == 2 && target == Target::Volume {
            return Err(ModelError::Spec("volume has no two-class sign labels".into()));
        }
        Ok(FeatureSpec { entries, target, arity })
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn max_lag(&self) -> usize {
        self.entries.iter().map(|e| e.lag).max().unwrap_or(0)
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(FeatureEntry::name).collect()
    }
}

fn emotion_lags(out: &mut Vec<FeatureEntry>, e: Emotion, lags: impl IntoIterator<Item = usize>) {
    out.extend(lags.into_iter().map(|l| FeatureEntry::emotion(e, l)));
}

/// Emotion/lag pairs selected per target from the correlation and
/// causality analysis.
pub fn svmes_feature_spec(target: Target, arity: usize) -> Result<FeatureSpec, ModelError> {
    use Emotion::*;
    let mut v = Vec::new();
    match target {
        Target::Close => emotion_lags(&mut v, Disgust, 1..=2),
        Target::Open => {
            emotion_lags(&mut v, Fear, 1..=5);
            emotion_lags(&mut v, Joy, 1..=5);
            emotion_lags(&mut v, Disgust, 3..=4);
        }
        Target::High => {
            emotion_lags(&mut v, Joy, 1..=4);
            emotion_lags(&mut v, Sadness, 1..=3);
            emotion_lags(&mut v, Disgust, [5]);
        }
        Target::Low => {
            emotion_lags(&mut v, Sadness, [1]);
            emotion_lags(&mut v, Joy, 1..=3);
            emotion_lags(&mut v, Disgust, [5]);
        }
        Target::Volume => {
            emotion_lags(&mut v, Sadness, 1..=5);
            emotion_lags(&mut v, Fear, 1..=5);
        }
    }
    FeatureSpec::new(v, target, arity)
}

/// The past five sessions' close returns.
pub fn svmmr_feature_spec(target: Target, arity: usize) -> Result<FeatureSpec, ModelError> {
    let entries = (1..=MAX_LAG)
        .map(|lag| FeatureEntry {
            source: FeatureSource::MarketReturn,
            lag,
        })
        .collect();
    FeatureSpec::new(entries, target, arity)
}

/// Every emotion at every lag, 25 columns.
pub fn all_emotions_spec(target: Target, arity: usize) -> Result<FeatureSpec, ModelError> {
    let mut v = Vec::new();
    for e in Emotion::ALL {
        emotion_lags(&mut v, e, 1..=MAX_LAG);
    }
    FeatureSpec::new(v, target, arity)
}
