use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::rng::rng_from_seed;

/// Pearson product-moment correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::Argument(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(StatsError::Argument("pearson needs at least 3 pairs".into()));
    }
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::Degenerate("constant input to pearson".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Mean and `N - 1` standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 || is_constant(values) {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub sample_size: usize,
    /// Classic bootstrap draws with replacement; the default subsamples
    /// without replacement.
    #[serde(default)]
    pub with_replacement: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 100,
            sample_size: 150,
            with_replacement: false,
        }
    }
}

/// Mean and standard deviation of a set of resampled correlations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResampleSummary {
    pub mean: f64,
    pub std: f64,
}

/// Correlation over `n_resamples` random subsets of `sample_size` index pairs.
pub fn bootstrap_correlation(
    x: &[f64],
    y: &[f64],
    cfg: &BootstrapConfig,
    seed: u64,
) -> Result<ResampleSummary, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::Argument("length mismatch".into()));
    }
    if x.len() < cfg.sample_size {
        return Err(StatsError::Argument(format!(
            "series of {} pairs shorter than sample size {}",
            x.len(),
            cfg.sample_size
        )));
    }
    if cfg.n_resamples == 0 {
        return Err(StatsError::Argument("n_resamples must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut rhos = Vec::with_capacity(cfg.n_resamples);
    let mut xs = Vec::with_capacity(cfg.sample_size);
    let mut ys = Vec::with_capacity(cfg.sample_size);
    for _ in 0..cfg.n_resamples {
        xs.clear();
        ys.clear();
        if cfg.with_replacement {
            for _ in 0..cfg.sample_size {
                let i = rng.random_range(0..x.len());
                xs.push(x[i]);
                ys.push(y[i]);
            }
        } else {
            for i in index::sample(&mut rng, x.len(), cfg.sample_size) {
                xs.push(x[i]);
                ys.push(y[i]);
            }
        }
        rhos.push(pearson(&xs, &ys)?);
    }
    let (mean, std) = mean_std(&rhos);
    Ok(ResampleSummary { mean, std })
}

/// Correlation of `y` against `n_shuffles` random permutations of `x`.
pub fn shuffle_null(x: &[f64], y: &[f64], n_shuffles: usize, seed: u64) -> Result<ResampleSummary, StatsError> {
    pearson(x, y)?;
    if n_shuffles == 0 {
        return Err(StatsError::Argument("n_shuffles must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut xs = x.to_vec();
    let rhos = (0..n_shuffles)
        .map(|_| {
            xs.shuffle(&mut rng);
            pearson(&xs, y)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (mean, std) = mean_std(&rhos);
    Ok(ResampleSummary { mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
        assert!((pearson(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-15);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(StatsError::Degenerate(_))));
        assert!(matches!(pearson(&[0.1; 3], &[1.0, 2.0, 3.0]), Err(StatsError::Degenerate(_))));
        assert!(pearson(&x[..2], &x[..2]).is_err());
        assert!(pearson(&x, &x[..3]).is_err());
    }

    #[test]
    fn bootstrap_of_identical_series_is_exact() {
        let x = noise(191, 1);
        let s = bootstrap_correlation(&x, &x, &BootstrapConfig::default(), 9).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let (x, y) = (noise(191, 2), noise(191, 3));
        let cfg = BootstrapConfig::default();
        assert_eq!(
            bootstrap_correlation(&x, &y, &cfg, 5).unwrap(),
            bootstrap_correlation(&x, &y, &cfg, 5).unwrap()
        );
        let classic = BootstrapConfig {
            with_replacement: true,
            ..cfg
        };
        assert_eq!(
            bootstrap_correlation(&x, &y, &classic, 5).unwrap(),
            bootstrap_correlation(&x, &y, &classic, 5).unwrap()
        );
        assert!(bootstrap_correlation(&x[..100], &y[..100], &cfg, 5).is_err());
    }

    #[test]
    fn bootstrap_of_independent_noise_is_near_zero() {
        // The subsample mean tracks the full-sample correlation, whose null
        // spread is about 1/sqrt(191) = 0.072, so 95% of seeds land inside
        // 1.96 of those and the subsample average stays close to the full rho.
        let cfg = BootstrapConfig::default();
        let bound = 1.96 / 191f64.sqrt();
        let mut hits = 0;
        for s in 0..50u64 {
            let x = noise(191, derive_seed(s, &[0]));
            let y = noise(191, derive_seed(s, &[1]));
            let boot = bootstrap_correlation(&x, &y, &cfg, s).unwrap();
            let full = pearson(&x, &y).unwrap();
            assert!((boot.mean - full).abs() < 0.02, "seed {s}: {} vs {full}", boot.mean);
            if boot.mean.abs() < bound {
                hits += 1;
            }
        }
        assert!(hits >= 45, "only {hits} of 50 seeds inside {bound}");
    }

    #[test]
    fn shuffle_null_is_centered() {
        let x = noise(191, 11);
        let y: Vec<f64> = x.iter().zip(noise(191, 12)).map(|(a, b)| a + 0.2 * b).collect();
        let s = shuffle_null(&x, &y, 100, 4).unwrap();
        assert!(s.mean.abs() < 3.0 * 3.0 * s.std / 10.0, "{s:?}");
        assert_eq!(s, shuffle_null(&x, &y, 100, 4).unwrap());
    }

    #[test]
    fn shuffled_identity_loses_perfect_correlation() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        for seed in 0..200 {
            let s = shuffle_null(&x, &x, 5, seed).unwrap();
            assert!(s.mean < 1.0);
        }
    }
}
