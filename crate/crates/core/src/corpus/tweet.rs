use std::io::{BufRead, Write};

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime, TimeZone};
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::Emotion;

const CIVIL_OFFSET_SECS: i32 = 8 * 3600;

/// The fixed UTC+8 offset whose civil date is the daily aggregation key.
pub fn civil_offset() -> FixedOffset {
    FixedOffset::east_opt(CIVIL_OFFSET_SECS).expect("valid offset")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "f")]
    Female,
    #[serde(rename = "m")]
    Male,
    #[serde(rename = "u")]
    Unknown,
}

/// One microblog post.
#[derive(Clone, Debug, PartialEq)]
pub struct TweetRecord {
    pub id: String,
    pub timestamp: DateTime<FixedOffset>,
    pub text: String,
    pub followers: u64,
    pub gender: Gender,
    pub label: Option<Emotion>,
}

impl TweetRecord {
    /// Calendar date of the post in UTC+8.
    pub fn civil_date(&self) -> NaiveDate {
        self.timestamp.with_timezone(&civil_offset()).date_naive()
    }
}

/// JSONL line layout.
#[derive(Debug, Serialize, Deserialize)]
struct TweetLine {
    id: String,
    ts: String,
    text: String,
    followers: u64,
    gender: Gender,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Emotion>,
}

fn parse_timestamp(ts: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(ts) {
        return Some(t);
    }
    // Offset-less timestamps are read as UTC+8 civil time.
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(ts, fmt).ok())
        .and_then(|naive| civil_offset().from_local_datetime(&naive).single())
}

impl TryFrom<TweetLine> for TweetRecord {
    type Error = String;

    fn try_from(line: TweetLine) -> Result<Self, Self::Error> {
        if line.text.trim().is_empty() {
            return Err("empty text".into());
        }
        let timestamp =
            parse_timestamp(&line.ts).ok_or_else(|| format!("invalid timestamp `{}`", line.ts))?;
        Ok(TweetRecord {
            id: line.id,
            timestamp,
            text: line.text,
            followers: line.followers,
            gender: line.gender,
            label: line.label,
        })
    }
}

/// Records that survived parsing plus the count of rejected lines.
#[derive(Debug, Default)]
pub struct ParsedTweets {
    pub records: Vec<TweetRecord>,
    pub skipped: usize,
}

/// Reads line-delimited tweet records. Malformed lines are skipped and
/// counted; blank lines are ignored. Fails when more than half of the
/// non-blank lines are malformed.
pub fn parse_tweets<R: BufRead>(reader: R) -> Result<ParsedTweets, CorpusError> {
    let mut out = ParsedTweets::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<TweetLine>(&line)
            .map_err(|e| e.to_string())
            .and_then(TweetRecord::try_from);
        match parsed {
            Ok(rec) => out.records.push(rec),
            Err(reason) => {
                log::debug!("skipping tweet line {}: {}", lineno + 1, reason);
                out.skipped += 1;
            }
        }
    }
    let total = out.records.len() + out.skipped;
    if out.skipped * 2 > total {
        return Err(CorpusError::Format {
            skipped: out.skipped,
            total,
        });
    }
    Ok(out)
}

/// Writes records in the JSONL layout read by [`parse_tweets`].
pub fn write_tweets<'a, W, I>(mut writer: W, records: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TweetRecord>,
{
    for rec in records {
        let line = TweetLine {
            id: rec.id.clone(),
            ts: rec.timestamp.to_rfc3339(),
            text: rec.text.clone(),
            followers: rec.followers,
            gender: rec.gender,
            label: rec.label,
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Stock keywords a post must mention to count as stock-relevant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct KeywordSet {
    keywords: Vec<String>,
}

impl KeywordSet {
    pub fn new<S: Into<String>>(keywords: impl IntoIterator<Item = S>) -> Result<Self, CorpusError> {
        let keywords: Vec<String> = keywords.into_iter().map(Into::into).collect();
        if keywords.is_empty() {
            return Err(CorpusError::Keywords("keyword set is empty".into()));
        }
        for (i, k) in keywords.iter().enumerate() {
            if k.is_empty() {
                return Err(CorpusError::Keywords("empty keyword".into()));
            }
            if keywords[..i].contains(k) {
                return Err(CorpusError::Keywords(format!("duplicate keyword `{k}`")));
            }
        }
        Ok(KeywordSet { keywords })
    }

    /// English renderings of the six default keywords.
    pub fn english() -> Self {
        KeywordSet::new([
            "Stock",
            "Stock Market",
            "Security",
            "Shenzhen Composite Index",
            "Shanghai Composite Index",
            "Component Index",
        ])
        .expect("static keywords are valid")
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn matches(&self, text: &str) -> bool {
        self.keywords.iter().any(|k| text.contains(k.as_str()))
    }
}

impl Default for KeywordSet {
    /// Stock, stock market, security, Shenzhen composite, Shanghai composite
    /// and component index.
    fn default() -> Self {
        KeywordSet::new(["股票", "股市", "证券", "深证综指", "上证综指", "成份指数"])
            .expect("static keywords are valid")
    }
}

impl TryFrom<Vec<String>> for KeywordSet {
    type Error = CorpusError;
    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        KeywordSet::new(v)
    }
}

impl From<KeywordSet> for Vec<String> {
    fn from(k: KeywordSet) -> Self {
        k.keywords
    }
}

/// Keeps the records whose text contains at least one keyword, in order.
pub fn filter_stock_relevant(tweets: &[TweetRecord], keys: &KeywordSet) -> Vec<TweetRecord> {
    tweets.iter().filter(|t| keys.matches(&t.text)).cloned().collect()
}
