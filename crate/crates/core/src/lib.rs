//! Emotion-to-market analytics for stock-relevant microblog posts.
//!
//! The pipeline classifies posts into five emotions, aggregates daily
//! emotion proportions on trading days, relates them to percent-change
//! market targets through correlation and Granger tests, and trains
//! discretized-market classifiers on lagged emotion features.

pub mod corpus;
pub mod discretize;
mod emotion;
pub mod investors;
pub mod market;
pub mod models;
pub mod rng;
pub mod series;
pub mod stats;
pub mod synth;

pub use emotion::{Emotion, UnknownEmotion};
