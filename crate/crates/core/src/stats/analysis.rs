//! The emotion × lag × target grid of correlation and causality tests.

use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bootstrap_correlation, granger_test, pearson, shuffle_null, significance_stars, BootstrapConfig};
use crate::market::{Target, TargetSeries};
use crate::rng::{derive_seed, stage};
use crate::series::{EmotionSeries, TradingCalendar};
use crate::Emotion;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub max_lag: usize,
    pub bootstrap: BootstrapConfig,
    pub n_shuffles: usize,
    pub alpha: f64,
    /// Difference both series once before the causality test.
    #[serde(default)]
    pub first_difference: bool,
    /// Last date of the analysis window; `None` uses every row.
    pub window_end: Option<NaiveDate>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            max_lag: 5,
            bootstrap: BootstrapConfig::default(),
            n_shuffles: 100,
            alpha: 0.05,
            first_difference: false,
            window_end: Some(crate::market::default_split_boundary()),
        }
    }
}

/// One cell of the grid. Statistics that could not be computed are `None`
/// and the reason is kept in `notes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub emotion: Emotion,
    pub lag: usize,
    pub target: Target,
    pub n_pairs: usize,
    pub rho: Option<f64>,
    pub boot_mean: Option<f64>,
    pub boot_std: Option<f64>,
    pub shuffle_mean: Option<f64>,
    pub shuffle_std: Option<f64>,
    pub granger_n_obs: usize,
    pub f_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub df_num: usize,
    pub df_den: usize,
    pub significant: bool,
    pub stars: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Pairs `(emotion on session k - lag, target on session k)` inside the
/// window.
pub fn lagged_pairs(
    emotions: &EmotionSeries,
    targets: &TargetSeries,
    calendar: &TradingCalendar,
    e: Emotion,
    lag: usize,
    t: Target,
    window_end: Option<NaiveDate>,
) -> (Vec<f64>, Vec<f64>) {
    let days = calendar.days();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for row in &targets.rows {
        if window_end.is_some_and(|w| row.date > w) {
            continue;
        }
        let Some(k) = calendar.index_of(row.date) else { continue };
        if k < lag {
            continue;
        }
        if let Some(src) = emotions.get(days[k - lag]) {
            x.push(src.proportion(e));
            y.push(row.value(t));
        }
    }
    (x, y)
}

/// Same-day `(target, emotion)` series over dates present in both.
pub fn aligned_series(
    emotions: &EmotionSeries,
    targets: &TargetSeries,
    e: Emotion,
    t: Target,
    window_end: Option<NaiveDate>,
) -> (Vec<f64>, Vec<f64>) {
    let (mut y, mut x) = (Vec::new(), Vec::new());
    for row in &targets.rows {
        if window_end.is_some_and(|w| row.date > w) {
            continue;
        }
        if let Some(src) = emotions.get(row.date) {
            y.push(row.value(t));
            x.push(src.proportion(e));
        }
    }
    (y, x)
}

fn difference(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

fn analyze_cell(
    emotions: &EmotionSeries,
    targets: &TargetSeries,
    calendar: &TradingCalendar,
    (e, lag, t): (Emotion, usize, Target),
    cfg: &AnalysisConfig,
    seed: u64,
) -> AnalysisRow {
    let coords = [e.index() as u64, lag as u64, t as u64];
    let mut row = AnalysisRow {
        emotion: e,
        lag,
        target: t,
        n_pairs: 0,
        rho: None,
        boot_mean: None,
        boot_std: None,
        shuffle_mean: None,
        shuffle_std: None,
        granger_n_obs: 0,
        f_stat: None,
        p_value: None,
        df_num: lag,
        df_den: 0,
        significant: false,
        stars: String::new(),
        notes: Vec::new(),
    };

    let (x, y) = lagged_pairs(emotions, targets, calendar, e, lag, t, cfg.window_end);
    row.n_pairs = x.len();
    match pearson(&x, &y) {
        Ok(r) => {
            row.rho = Some(r);
            let bseed = derive_seed(seed, &[stage::BOOTSTRAP, coords[0], coords[1], coords[2]]);
            match bootstrap_correlation(&x, &y, &cfg.bootstrap, bseed) {
                Ok(s) => {
                    row.boot_mean = Some(s.mean);
                    row.boot_std = Some(s.std);
                }
                Err(err) => row.notes.push(format!("bootstrap: {err}")),
            }
            let sseed = derive_seed(seed, &[stage::SHUFFLE, coords[0], coords[1], coords[2]]);
            match shuffle_null(&x, &y, cfg.n_shuffles, sseed) {
                Ok(s) => {
                    row.shuffle_mean = Some(s.mean);
                    row.shuffle_std = Some(s.std);
                }
                Err(err) => row.notes.push(format!("shuffle: {err}")),
            }
        }
        Err(err) => row.notes.push(format!("correlation: {err}")),
    }

    let (mut gy, mut gx) = aligned_series(emotions, targets, e, t, cfg.window_end);
    if cfg.first_difference {
        gy = difference(&gy);
        gx = difference(&gx);
    }
    match granger_test(&gy, &gx, lag, cfg.alpha) {
        Ok(g) => {
            row.granger_n_obs = g.n_obs;
            row.f_stat = Some(g.f_stat);
            row.p_value = Some(g.p_value);
            row.df_den = g.df_den;
            row.significant = g.significant;
            row.stars = significance_stars(g.p_value).to_string();
        }
        Err(err) => row.notes.push(format!("granger: {err}")),
    }
    row
}

/// Every emotion at lags `1..=max_lag` against every target, in that
/// nesting order. Cells run in parallel with seeds derived from their
/// coordinates, so the output does not depend on scheduling.
pub fn analyze_grid(
    emotions: &EmotionSeries,
    targets: &TargetSeries,
    calendar: &TradingCalendar,
    cfg: &AnalysisConfig,
    seed: u64,
) -> Vec<AnalysisRow> {
    let cells: Vec<(Emotion, usize, Target)> = Emotion::ALL
        .into_iter()
        .flat_map(|e| (1..=cfg.max_lag).flat_map(move |l| Target::ALL.into_iter().map(move |t| (e, l, t))))
        .collect();
    cells
        .into_par_iter()
        .map(|cell| analyze_cell(emotions, targets, calendar, cell, cfg, seed))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_analysis_csv<W: Write>(mut w: W, rows: &[AnalysisRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "emotion,lag,target,n_pairs,rho,boot_mean,boot_std,shuffle_mean,shuffle_std,f_stat,p_value,df_num,df_den,significant,stars"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.emotion,
            r.lag,
            r.target,
            r.n_pairs,
            opt(r.rho),
            opt(r.boot_mean),
            opt(r.boot_std),
            opt(r.shuffle_mean),
            opt(r.shuffle_std),
            opt(r.f_stat),
            opt(r.p_value),
            r.df_num,
            r.df_den,
            r.significant,
            r.stars
        )?;
    }
    w.flush()
}
