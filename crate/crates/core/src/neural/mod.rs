//! Feedforward networks trained from scratch: dense layers with a bounded
//! hidden activation, per-column min-max scaling fitted on the training
//! split, online gradient descent with an adaptive step, and a seeded
//! multi-restart search ranked by an out-of-sample scorer.

mod format;
mod model;
mod restart;
mod train;

pub use format::{read_model, write_model, FORMAT_HEADER};
pub use model::{gradient_check, Activation, Affine, NetworkModel, Sample, ScaledInput};
pub use restart::{forecast_levels, multi_restart_train, OutOfSampleIsm, RankedModel, Scorer};
pub use train::{fit, split, split_point, train, FitOutcome, FitSchedule};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::MetricsError;
use crate::preprocess::PreprocessError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix has {rows} rows, need at least {min}")]
    TooFewRows { rows: usize, min: usize },
    #[error("expected {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training output is constant")]
    ConstantOutput,
    #[error("training loss became non-finite")]
    DivergedTraining,
    #[error("no restart finished training")]
    AllDiverged,
    #[error("input was scaled for a different model")]
    ForeignScaling,
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

pub type Result<T> = std::result::Result<T, NeuralError>;

/// Minimum rows a matrix needs before it can be split.
pub const MIN_SPLIT_ROWS: usize = 20;
/// Largest share of rows ever assigned to the test range.
pub const MAX_TEST_FRACTION: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Maximum epochs per training.
    pub cycles: usize,
    /// Stop once MAE / output range falls below this.
    pub stop_error: f64,
    pub learning_rate: f64,
    /// Independent trainings per matrix. Omitted from a config file it reads
    /// as the desk-scale count; `Default` keeps the full 5000.
    #[serde(default = "TrainConfig::desk_restarts")]
    pub restarts: usize,
    pub rng_seed: u64,
    /// Share of rows (chronologically first) used for training.
    pub split: f64,
    /// Hidden layer sizes; `None` uses one hidden layer as wide as the input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_layers: Option<Vec<usize>>,
    /// Initial weights are uniform in `[-init_range, init_range]`.
    pub init_range: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            cycles: 1000,
            stop_error: 0.10,
            learning_rate: 0.10,
            restarts: FULL_RESTARTS,
            rng_seed: 0x5eed,
            split: 0.60,
            hidden_layers: None,
            init_range: 0.5,
        }
    }
}

pub const DESK_RESTARTS: usize = 50;
pub const FULL_RESTARTS: usize = 5000;

impl TrainConfig {
    /// Full-scale defaults with the desk-scale restart count.
    pub fn desk() -> Self {
        Self {
            restarts: DESK_RESTARTS,
            ..Self::default()
        }
    }

    fn desk_restarts() -> usize {
        DESK_RESTARTS
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(NeuralError::InvalidConfig(m));
        if self.cycles == 0 {
            return fail("cycles must be positive".into());
        }
        if !(self.stop_error > 0.0 && self.stop_error < 1.0) {
            return fail(format!("stop_error {} outside (0, 1)", self.stop_error));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.restarts == 0 {
            return fail("restarts must be positive".into());
        }
        if !(0.55..=0.70).contains(&self.split) {
            return fail(format!("split {} outside [0.55, 0.70]", self.split));
        }
        if let Some(h) = &self.hidden_layers {
            if h.contains(&0) {
                return fail("hidden layer sizes must be positive".into());
            }
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return fail("init_range must be positive".into());
        }
        Ok(())
    }

    pub fn layer_sizes(&self, inputs: usize) -> Vec<usize> {
        let mut sizes = vec![inputs];
        match &self.hidden_layers {
            Some(h) => sizes.extend(h),
            None => sizes.push(inputs),
        }
        sizes.push(1);
        sizes
    }
}

/// Independent 64-bit seed for sub-stream `stream` of `master` (SplitMix64).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
