//! Monthly country-risk spread forecasting.
//!
//! The crate turns a leading economic indicator into rolling historical
//! Value-at-Risk features, assembles lagged training matrices from a fixed
//! catalogue of base sets, trains small feedforward networks with many
//! seeded restarts, ranks them out of sample with a trading-style score and
//! stacks the best of them under a master network.
//!
//! The runnable programs under `examples/` walk through each stage.

pub mod ensemble;
pub mod metrics;
pub mod neural;
pub mod pipeline;
pub mod preprocess;
pub mod series;
pub mod synthetic;
