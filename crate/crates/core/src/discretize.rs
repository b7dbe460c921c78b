//! Mapping continuous targets to ordered classes: equal-frequency bins,
//! one-dimensional K-means, and the sign of a percent change.

use chrono::NaiveDate;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, thiserror::Error)]
pub enum DiscretizeError {
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizeMethod {
    EqualFrequency,
    Kmeans,
    Sign,
}

/// A fitted mapping from values to ordered class labels.
///
/// `boundaries[i]` is the largest value of class `classes[i]`; values equal
/// to a boundary fall in the lower class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    pub method: DiscretizeMethod,
    pub boundaries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroids: Option<Vec<f64>>,
    pub classes: Vec<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(NaiveDate, NaiveDate)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Discretizer {
    /// The two-class sign rule: positive → 1, otherwise 0.
    pub fn sign() -> Self {
        Discretizer {
            method: DiscretizeMethod::Sign,
            boundaries: vec![0.0],
            centroids: None,
            classes: vec![0, 1],
            fit_window: None,
            seed: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.classes.len()
    }

    pub fn classify(&self, v: f64) -> i8 {
        match &self.centroids {
            Some(c) => self.classes[nearest_centroid(c, v)],
            None => {
                let idx = self.boundaries.iter().take_while(|b| v > **b).count();
                self.classes[idx]
            }
        }
    }

    pub fn with_fit_window(mut self, first: NaiveDate, last: NaiveDate) -> Self {
        self.fit_window = Some((first, last));
        self
    }
}

/// Class labels for `k` ordered groups, centred on zero for odd `k`
/// (three classes are −1, 0, 1).
pub fn ordered_labels(k: usize) -> Vec<i8> {
    let shift = (k as i8 - 1) / 2;
    (0..k as i8).map(|i| i - shift).collect()
}

/// Index of the nearest centroid; a value equidistant from two centroids
/// goes to the lower one.
fn nearest_centroid(centroids: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut best_d = (v - centroids[0]).abs();
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = (v - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSeries {
    pub dates: Vec<NaiveDate>,
    pub labels: Vec<i8>,
}

fn sorted(values: &[f64]) -> Result<Vec<f64>, DiscretizeError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DiscretizeError::Argument("non-finite value".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

fn distinct_count(sorted: &[f64]) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Three equal-size groups in sorted order. When `n` is not a multiple of
/// three the lower groups take the extra rows.
pub fn equal_frequency_fit(values: &[f64]) -> Result<Discretizer, DiscretizeError> {
    let s = sorted(values)?;
    if distinct_count(&s) < 3 {
        return Err(DiscretizeError::Degenerate(
            "equal-frequency binning needs at least 3 distinct values".into(),
        ));
    }
    let n = s.len();
    let (base, rem) = (n / 3, n % 3);
    let first = base + usize::from(rem > 0);
    let second = base + usize::from(rem > 1);
    let boundaries = vec![s[first - 1], s[first + second - 1]];
    if !(boundaries[0] < boundaries[1] && boundaries[1] < s[n - 1]) {
        return Err(DiscretizeError::Degenerate(
            "ties prevent three non-empty equal-frequency bins".into(),
        ));
    }
    Ok(Discretizer {
        method: DiscretizeMethod::EqualFrequency,
        boundaries,
        centroids: None,
        classes: ordered_labels(3),
        fit_window: None,
        seed: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmeansConfig {
    pub k: usize,
    pub n_init: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        KmeansConfig {
            k: 3,
            n_init: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// Contiguous clustering of sorted data: `starts[j]` is the first sorted
/// index of cluster `j`.
#[derive(Clone, Debug, PartialEq)]
struct Partition {
    starts: Vec<usize>,
    centroids: Vec<f64>,
    sse: f64,
}

fn segment_stats(s: &[f64], starts: &[usize]) -> (Vec<f64>, f64) {
    let mut centroids = Vec::with_capacity(starts.len());
    let mut sse = 0.0;
    for (j, &lo) in starts.iter().enumerate() {
        let hi = starts.get(j + 1).copied().unwrap_or(s.len());
        let seg = &s[lo..hi];
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        sse += seg.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        centroids.push(mean);
    }
    (centroids, sse)
}

/// Seeding from a random first point. Run 0 adds the farthest remaining
/// point each step; later runs draw each next point with probability
/// proportional to its squared distance from the chosen ones, a randomized
/// form of the same rule that varies the starts.
fn farthest_point_init(
    s: &[f64],
    k: usize,
    first: std::ops::Range<usize>,
    randomized: bool,
    rng: &mut crate::rng::Rng,
) -> Vec<f64> {
    let mut centroids = vec![s[rng.random_range(first)]];
    while centroids.len() < k {
        let dist: Vec<f64> = s
            .iter()
            .map(|v| centroids.iter().map(|c| (v - c).powi(2)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = dist.iter().sum();
        let pick = if randomized && total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = dist.len() - 1;
            for (i, d) in dist.iter().enumerate() {
                if u < *d {
                    idx = i;
                    break;
                }
                u -= d;
            }
            idx
        } else {
            let mut idx = 0;
            for (i, d) in dist.iter().enumerate() {
                if *d > dist[idx] {
                    idx = i;
                }
            }
            idx
        };
        centroids.push(s[pick]);
    }
    centroids.sort_by(f64::total_cmp);
    centroids
}

/// Lloyd iterations on sorted data starting from `centroids`.
fn lloyd(s: &[f64], mut centroids: Vec<f64>, cfg: &KmeansConfig) -> Partition {
    let k = centroids.len();
    let span = s[s.len() - 1] - s[0];
    let mut assign = vec![0usize; s.len()];
    for _ in 0..cfg.max_iter {
        for (a, v) in assign.iter_mut().zip(s) {
            *a = nearest_centroid(&centroids, *v);
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (a, v) in assign.iter().zip(s) {
            sums[*a] += v;
            counts[*a] += 1;
        }
        let mut next: Vec<f64> = (0..k)
            .map(|j| if counts[j] > 0 { sums[j] / counts[j] as f64 } else { f64::NAN })
            .collect();
        for j in 0..k {
            if counts[j] == 0 {
                // reseed an empty cluster at the worst-served point
                let worst = s
                    .iter()
                    .zip(&assign)
                    .map(|(v, a)| (v, (v - next[*a]).abs()))
                    .filter(|(_, d)| d.is_finite())
                    .fold((s[0], -1.0), |acc, (v, d)| if d > acc.1 { (*v, d) } else { acc });
                next[j] = worst.0;
            }
        }
        next.sort_by(f64::total_cmp);
        let shift = next
            .iter()
            .zip(&centroids)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        centroids = next;
        if shift <= cfg.tol * span {
            break;
        }
    }
    for (a, v) in assign.iter_mut().zip(s) {
        *a = nearest_centroid(&centroids, *v);
    }
    // assignments are monotone in sorted order, so clusters are contiguous
    let mut starts = vec![0usize];
    for i in 1..s.len() {
        if assign[i] != assign[i - 1] {
            starts.push(i);
        }
    }
    let (centroids, sse) = segment_stats(s, &starts);
    Partition {
        starts,
        centroids,
        sse,
    }
}

/// Local search over cluster boundaries: each boundary is moved to its best
/// position with the others held fixed, and each inner cluster is slid as a
/// block. Repeats while the within-cluster sum of squares strictly falls.
fn refine_boundaries(s: &[f64], mut p: Partition) -> Partition {
    let n = s.len();
    let try_starts = |p: &mut Partition, starts: Vec<usize>| -> bool {
        let (centroids, sse) = segment_stats(s, &starts);
        if sse < p.sse {
            *p = Partition { starts, centroids, sse };
            true
        } else {
            false
        }
    };
    loop {
        let mut improved = false;
        let k = p.starts.len();
        for j in 1..k {
            let hi = p.starts.get(j + 1).copied().unwrap_or(n);
            for cand in p.starts[j - 1] + 1..hi {
                let mut starts = p.starts.clone();
                starts[j] = cand;
                improved |= try_starts(&mut p, starts);
            }
        }
        for j in 1..k.saturating_sub(1) {
            let hi = p.starts.get(j + 2).copied().unwrap_or(n);
            let (a, b) = (p.starts[j], p.starts[j + 1]);
            let width = b - a;
            for na in p.starts[j - 1] + 1..hi - width {
                if na != a {
                    let mut starts = p.starts.clone();
                    starts[j] = na;
                    starts[j + 1] = na + width;
                    improved |= try_starts(&mut p, starts);
                }
            }
        }
        if !improved {
            return p;
        }
    }
}

/// Best-of-`n_init` Lloyd clustering of one-dimensional data. Centroids are
/// sorted and labelled in ascending order.
pub fn kmeans1d_fit(values: &[f64], cfg: &KmeansConfig, seed: u64) -> Result<Discretizer, DiscretizeError> {
    let centroids = kmeans1d_centroids(values, cfg, seed)?;
    let boundaries = centroids.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(Discretizer {
        method: DiscretizeMethod::Kmeans,
        boundaries,
        classes: ordered_labels(centroids.len()),
        centroids: Some(centroids),
        fit_window: None,
        seed: Some(seed),
    })
}

/// The sorted centroids chosen by [`kmeans1d_fit`].
pub fn kmeans1d_centroids(values: &[f64], cfg: &KmeansConfig, seed: u64) -> Result<Vec<f64>, DiscretizeError> {
    if cfg.k < 2 || cfg.n_init == 0 {
        return Err(DiscretizeError::Argument("k must be ≥ 2 and n_init ≥ 1".into()));
    }
    let s = sorted(values)?;
    if distinct_count(&s) < cfg.k {
        return Err(DiscretizeError::Degenerate(format!(
            "K-means with k = {} needs at least {} distinct values",
            cfg.k, cfg.k
        )));
    }
    let mut best: Option<Partition> = None;
    for run in 0..cfg.n_init {
        let mut rng = rng_from_seed(derive_seed(seed, &[run as u64]));
        // spread the first points over the sorted data
        let lo = (run * s.len() / cfg.n_init).min(s.len() - 1);
        let hi = ((run + 1) * s.len() / cfg.n_init).max(lo + 1);
        let init = farthest_point_init(&s, cfg.k, lo..hi, run > 0, &mut rng);
        let p = refine_boundaries(&s, lloyd(&s, init, cfg));
        if p.starts.len() == cfg.k && best.as_ref().is_none_or(|b| p.sse < b.sse) {
            best = Some(p);
        }
    }
    best.map(|p| p.centroids).ok_or_else(|| {
        DiscretizeError::Degenerate("no initialization produced k non-empty clusters".into())
    })
}

pub fn apply(disc: &Discretizer, dates: &[NaiveDate], values: &[f64]) -> ClassSeries {
    ClassSeries {
        dates: dates.to_vec(),
        labels: values.iter().map(|v| disc.classify(*v)).collect(),
    }
}

/// Positive change → 1; zero or negative → 0.
pub fn sign_binarize(dates: &[NaiveDate], values: &[f64]) -> ClassSeries {
    apply(&Discretizer::sign(), dates, values)
}
