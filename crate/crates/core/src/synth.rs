//! Synthetic fixtures: a labeled microblog corpus and a market whose close
//! is driven by one emotion at a chosen session lag.

use chrono::{Duration, NaiveDate, TimeZone};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{civil_offset, Gender, KeywordSet, TweetRecord};
use crate::market::{sse_sessions, study_period, MarketDay, Target};
use crate::rng::{derive_seed, rng_from_seed, stage, Rng};
use crate::Emotion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Stock-relevant posts on a trading day.
    pub tweets_per_session: usize,
    /// Stock-relevant posts on a weekend or holiday.
    pub tweets_per_closed_day: usize,
    /// Extra posts without any stock keyword, as a fraction of relevant ones.
    pub irrelevant_fraction: f64,
    pub planted_emotion: Emotion,
    pub planted_lag: usize,
    /// Close percent change per unit of the standardized driver.
    pub coupling: f64,
    /// Standard deviation of the close noise, in percent.
    pub noise: f64,
    pub n_users: usize,
    /// Size of the separate labeled training corpus.
    pub labeled_size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let (start, end) = study_period();
        SynthConfig {
            start,
            end,
            tweets_per_session: 300,
            tweets_per_closed_day: 60,
            irrelevant_fraction: 0.1,
            planted_emotion: Emotion::Disgust,
            planted_lag: 2,
            coupling: 1.0,
            noise: 0.1,
            n_users: 4000,
            labeled_size: 3000,
            seed: 42,
        }
    }
}

/// Which (emotion, lag, target) cells carry real signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted_emotion: Emotion,
    pub planted_lag: usize,
    pub coupling: f64,
    pub noise: f64,
    pub seed: u64,
    /// Planted emotion at every lag from the planted one up, against the
    /// targets built from the close.
    pub implied_cells: Vec<(Emotion, usize, Target)>,
    pub sessions: usize,
}

impl GroundTruth {
    pub fn is_implied(&self, e: Emotion, lag: usize, t: Target) -> bool {
        self.coupling != 0.0 && self.implied_cells.contains(&(e, lag, t))
    }
}

#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub tweets: Vec<TweetRecord>,
    pub labeled: Vec<TweetRecord>,
    pub market: Vec<MarketDay>,
    pub truth: GroundTruth,
}

const VOCAB: [[&str; 6]; 5] = [
    ["愤怒", "气愤", "恼火", "暴怒", "火大", "可恨"],
    ["恶心", "厌恶", "讨厌", "反感", "鄙视", "嫌弃"],
    ["开心", "高兴", "快乐", "喜悦", "兴奋", "满意"],
    ["伤心", "难过", "悲伤", "失落", "沮丧", "心酸"],
    ["害怕", "恐惧", "担心", "惊慌", "紧张", "不安"],
];
const FILLER: [&str; 10] = ["今天", "大盘", "行情", "感觉", "真的", "我们", "还是", "已经", "一下", "这个"];
const OFF_TOPIC: [&str; 8] = ["天气", "电影", "晚饭", "周末", "旅行", "音乐", "朋友", "篮球"];

struct User {
    followers: u64,
    gender: Gender,
}

/// Follower counts in quotas of 53.5% up to 100, 45% between, and 1.5% of
/// at least 10,000.
fn make_users(n: usize, rng: &mut Rng) -> Vec<User> {
    let n3 = (n as f64 * 0.015).round() as usize;
    let n1 = (n as f64 * 0.535).round() as usize;
    let n2 = n - n1 - n3;
    let mut followers: Vec<u64> = Vec::with_capacity(n);
    followers.extend((0..n1).map(|_| rng.random_range(0..=100)));
    followers.extend((0..n2).map(|_| (10f64.powf(rng.random_range(2.0..4.0)) as u64).clamp(101, 9_999)));
    followers.extend((0..n3).map(|_| (10f64.powf(rng.random_range(4.0..6.0)) as u64).max(10_000)));
    followers.shuffle(rng);
    followers
        .into_iter()
        .map(|f| {
            let g = rng.random::<f64>();
            let gender = if g < 0.4 {
                Gender::Female
            } else if g < 0.9 {
                Gender::Male
            } else {
                Gender::Unknown
            };
            User { followers: f, gender }
        })
        .collect()
}

fn post_text(emotion: Emotion, keyword: Option<&str>, rng: &mut Rng) -> String {
    let vocab = &VOCAB[emotion.index()];
    let mut parts: Vec<&str> = Vec::new();
    parts.push(FILLER[rng.random_range(0..FILLER.len())]);
    match keyword {
        Some(k) => parts.push(k),
        None => parts.push(OFF_TOPIC[rng.random_range(0..OFF_TOPIC.len())]),
    }
    for _ in 0..rng.random_range(2..=3) {
        parts.push(vocab[rng.random_range(0..vocab.len())]);
    }
    if rng.random::<f64>() < 0.5 {
        parts.push(FILLER[rng.random_range(0..FILLER.len())]);
    }
    parts.concat()
}

/// Rounds `total · shares` to integers summing to `total`, largest
/// remainders first.
fn apportion(total: usize, shares: &[f64; 5]) -> [usize; 5] {
    let raw: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    let mut counts: [usize; 5] = std::array::from_fn(|i| raw[i].floor() as usize);
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|a, b| (raw[*b] - raw[*b].floor()).total_cmp(&(raw[*a] - raw[*a].floor())).then(a.cmp(b)));
    let assigned: usize = counts.iter().sum();
    for i in order.into_iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Daily emotion shares. The planted emotion's share is
/// `0.06 + 0.02·s` with `s` a unit-variance uniform driver; the other four
/// split the rest with independent log-normal weights.
fn daily_shares(planted: Emotion, rng: &mut Rng) -> ([f64; 5], f64) {
    let s = rng.random_range(-(3f64.sqrt())..3f64.sqrt());
    let p = 0.06 + 0.02 * s;
    let mut w = [0.0; 5];
    for (i, wi) in w.iter_mut().enumerate() {
        if i != planted.index() {
            let z: f64 = StandardNormal.sample(rng);
            *wi = (0.5 * z).exp();
        }
    }
    let sum: f64 = w.iter().sum();
    let mut shares = [0.0; 5];
    for i in 0..5 {
        shares[i] = if i == planted.index() { p } else { (1.0 - p) * w[i] / sum };
    }
    (shares, s)
}

pub fn generate(cfg: &SynthConfig) -> SynthOutput {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[stage::SYNTH, 0]));
    let users = make_users(cfg.n_users.max(1), &mut rng);
    let keywords = KeywordSet::default();
    let keys = keywords.keywords();
    let sessions = sse_sessions(cfg.start, cfg.end);

    let mut tweets = Vec::new();
    let mut driver = std::collections::BTreeMap::new();
    let mut day = cfg.start;
    let mut next_id = 0u64;
    while day <= cfg.end {
        let (shares, s) = daily_shares(cfg.planted_emotion, &mut rng);
        driver.insert(day, s);
        let n = if sessions.binary_search(&day).is_ok() {
            cfg.tweets_per_session
        } else {
            cfg.tweets_per_closed_day
        };
        let counts = apportion(n, &shares);
        let n_off = (n as f64 * cfg.irrelevant_fraction).round() as usize;
        let mut emotions: Vec<(Emotion, bool)> = Emotion::ALL
            .iter()
            .flat_map(|e| std::iter::repeat_n((*e, true), counts[e.index()]))
            .collect();
        emotions.extend((0..n_off).map(|_| (Emotion::ALL[rng.random_range(0..5)], false)));
        emotions.shuffle(&mut rng);
        for (e, relevant) in emotions {
            let user = &users[rng.random_range(0..users.len())];
            let secs = rng.random_range(0..86_400);
            let local = day.and_hms_opt(0, 0, 0).expect("midnight") + Duration::seconds(secs);
            let keyword = relevant.then(|| keys[rng.random_range(0..keys.len())].as_str());
            tweets.push(TweetRecord {
                id: format!("s{next_id}"),
                timestamp: civil_offset().from_local_datetime(&local).single().expect("fixed offset"),
                text: post_text(e, keyword, &mut rng),
                followers: user.followers,
                gender: user.gender,
                label: Some(e),
            });
            next_id += 1;
        }
        day += Duration::days(1);
    }
    tweets.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.id.cmp(&b.id)));

    let mut lrng = rng_from_seed(derive_seed(cfg.seed, &[stage::SYNTH, 1]));
    let labeled = (0..cfg.labeled_size)
        .map(|i| {
            let e = Emotion::ALL[i % 5];
            let user = &users[lrng.random_range(0..users.len())];
            let keyword = keys[lrng.random_range(0..keys.len())].as_str();
            TweetRecord {
                id: format!("l{i}"),
                timestamp: civil_offset()
                    .from_local_datetime(&cfg.start.and_hms_opt(12, 0, 0).expect("noon"))
                    .single()
                    .expect("fixed offset"),
                text: post_text(e, Some(keyword), &mut lrng),
                followers: user.followers,
                gender: user.gender,
                label: Some(e),
            }
        })
        .collect();

    let mut mrng = rng_from_seed(derive_seed(cfg.seed, &[stage::SYNTH, 2]));
    let mut market = Vec::with_capacity(sessions.len());
    let mut prev_close = 3000.0;
    for (k, d) in sessions.iter().enumerate() {
        let eps: f64 = StandardNormal.sample(&mut mrng);
        let eta: f64 = StandardNormal.sample(&mut mrng);
        let up: f64 = StandardNormal.sample(&mut mrng);
        let down: f64 = StandardNormal.sample(&mut mrng);
        let vol: f64 = StandardNormal.sample(&mut mrng);
        let signal = if k >= cfg.planted_lag {
            cfg.coupling * driver[&sessions[k - cfg.planted_lag]]
        } else {
            0.0
        };
        let close_r = signal + cfg.noise * eps;
        let open_r = 0.5 * eta;
        let high_r = close_r.max(open_r) + 0.2 * up.abs();
        let low_r = close_r.min(open_r) - 0.2 * down.abs();
        let level = |r: f64| prev_close * (1.0 + r / 100.0);
        let day = MarketDay {
            date: *d,
            open: level(open_r),
            high: level(high_r),
            low: level(low_r),
            close: level(close_r),
            volume: 1e8 * (0.2 * vol).exp(),
        };
        prev_close = day.close;
        market.push(day);
    }

    let implied_cells = (cfg.planted_lag..=5)
        .flat_map(|l| {
            [Target::Close, Target::High, Target::Low]
                .into_iter()
                .map(move |t| (cfg.planted_emotion, l, t))
        })
        .collect();
    SynthOutput {
        tweets,
        labeled,
        market,
        truth: GroundTruth {
            planted_emotion: cfg.planted_emotion,
            planted_lag: cfg.planted_lag,
            coupling: cfg.coupling,
            noise: cfg.noise,
            seed: cfg.seed,
            implied_cells,
            sessions: sessions.len(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::investors::{FLevelThresholds, InvestorSegment};

    fn small() -> SynthConfig {
        SynthConfig {
            tweets_per_session: 40,
            tweets_per_closed_day: 10,
            labeled_size: 100,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn follower_levels_match_quotas() {
        let mut rng = rng_from_seed(1);
        let users = make_users(4000, &mut rng);
        let th = FLevelThresholds::default();
        let share = |lvl| users.iter().filter(|u| th.level(u.followers) == lvl).count() as f64 / 4000.0;
        assert!((share(InvestorSegment::FLevel1) - 0.535).abs() < 0.02);
        assert!((share(InvestorSegment::FLevel2) - 0.45).abs() < 0.02);
        assert!((share(InvestorSegment::FLevel3) - 0.015).abs() < 0.02);
    }

    #[test]
    fn apportion_sums_exactly() {
        let c = apportion(300, &[0.06, 0.2345, 0.3, 0.1655, 0.24]);
        assert_eq!(c.iter().sum::<usize>(), 300);
        assert_eq!(c[0], 18);
    }

    #[test]
    fn fixture_shape() {
        let out = generate(&small());
        assert_eq!(out.market.len(), 249);
        assert!(out.market.iter().all(|d| d.validate().is_ok()));
        let keys = KeywordSet::default();
        let relevant = out.tweets.iter().filter(|t| keys.matches(&t.text)).count();
        assert_eq!(relevant, 249 * 40 + (372 - 249) * 10);
        assert_eq!(out.labeled.len(), 100);
        assert_eq!(out.truth.implied_cells.len(), 12);
        assert!(out.truth.is_implied(Emotion::Disgust, 2, Target::Close));
        assert!(!out.truth.is_implied(Emotion::Disgust, 1, Target::Close));
    }

    #[test]
    fn deterministic() {
        let a = generate(&small());
        let b = generate(&small());
        assert_eq!(a.tweets, b.tweets);
        assert_eq!(a.market, b.market);
    }
}
