//! Correlation with resampling nulls, least squares, Granger causality and
//! the F distribution.

pub mod analysis;
mod correlation;
mod granger;
pub mod linalg;
pub mod special;

pub use correlation::{
    bootstrap_correlation, mean_std, pearson, shuffle_null, BootstrapConfig, ResampleSummary,
};
pub use granger::{granger_test, ols_fit, significance_stars, GrangerResult, OlsFit, MIN_DF_DEN};
pub use analysis::{analyze_grid, write_analysis_csv, AnalysisConfig, AnalysisRow};
pub use linalg::Matrix;
pub use special::{f_cdf, f_sf};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("singular design: column {0} is linearly dependent")]
    Singular(usize),
}
