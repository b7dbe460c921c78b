use serde::{Deserialize, Serialize};

use super::linalg::{least_squares, Matrix};
use super::special::f_sf;
use super::StatsError;

/// Relative pivot tolerance for rank detection.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub n_obs: usize,
    pub n_params: usize,
}

/// Ordinary least squares through Householder QR. The design must already
/// contain any intercept column.
pub fn ols_fit(design: &Matrix, y: &[f64]) -> Result<OlsFit, StatsError> {
    let (n_obs, n_params) = (design.rows(), design.cols());
    if y.len() != n_obs {
        return Err(StatsError::Argument(format!(
            "design has {n_obs} rows but y has {}",
            y.len()
        )));
    }
    if n_obs <= n_params {
        return Err(StatsError::Argument(format!(
            "{n_obs} observations for {n_params} parameters"
        )));
    }
    let coefficients =
        least_squares(design, y, RANK_TOL).map_err(|e| StatsError::Singular(e.column))?;
    let fitted = design.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss = residuals.iter().map(|r| r * r).sum();
    Ok(OlsFit {
        coefficients,
        residuals,
        rss,
        n_obs,
        n_params,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    /// Regression observations, `len - lag`.
    pub n_obs: usize,
    pub df_num: usize,
    pub df_den: usize,
    pub significant: bool,
}

/// Smallest residual degrees of freedom accepted by [`granger_test`].
pub const MIN_DF_DEN: usize = 10;

/// Tests whether lags `1..=lag` of `x` improve on an autoregression of `y`
/// with the same lags.
///
/// Both regressions use the observations `t = lag..len`, so with
/// `T = len - lag` the statistic is
/// `((RSS_r - RSS_u) / lag) / (RSS_u / (T - 2·lag - 1))`, referred to the
/// upper tail of `F(lag, T - 2·lag - 1)`.
pub fn granger_test(y: &[f64], x: &[f64], lag: usize, alpha: f64) -> Result<GrangerResult, StatsError> {
    if y.len() != x.len() {
        return Err(StatsError::Argument("y and x lengths differ".into()));
    }
    if lag == 0 {
        return Err(StatsError::Argument("lag must be at least 1".into()));
    }
    let n_obs = y.len().saturating_sub(lag);
    let df_den = n_obs.checked_sub(2 * lag + 1).filter(|d| *d >= MIN_DF_DEN).ok_or_else(|| {
        StatsError::Argument(format!(
            "series of {} too short for lag {lag}: need {} observations",
            y.len(),
            lag + 2 * lag + 1 + MIN_DF_DEN
        ))
    })?;

    let mut restricted = Matrix::zeros(n_obs, lag + 1);
    let mut unrestricted = Matrix::zeros(n_obs, 2 * lag + 1);
    for row in 0..n_obs {
        let t = row + lag;
        restricted.set(row, 0, 1.0);
        unrestricted.set(row, 0, 1.0);
        for i in 1..=lag {
            restricted.set(row, i, y[t - i]);
            unrestricted.set(row, i, y[t - i]);
            unrestricted.set(row, lag + i, x[t - i]);
        }
    }
    let target = &y[lag..];
    let rss_r = ols_fit(&restricted, target)?.rss;
    let rss_u = ols_fit(&unrestricted, target)?.rss;

    let gain = (rss_r - rss_u).max(0.0);
    let f_stat = if rss_u > 0.0 {
        (gain / lag as f64) / (rss_u / df_den as f64)
    } else if gain > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let p_value = f_sf(f_stat, lag as u32, df_den as u32);
    Ok(GrangerResult {
        lag,
        f_stat,
        p_value,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        n_obs,
        df_num: lag,
        df_den,
        significant: p_value < alpha,
    })
}

/// Table notation: `*` below 0.05, `**` below 0.01, `***` below 0.001.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
