//! Feature preparation: the leading indicator's rolling historical VaR, its
//! exponential and block smoothings, the normalized-difference output
//! transform, and the lagged training matrices of the ten base sets.

mod base_sets;
mod matrix;
mod smoothing;
mod var;

pub use base_sets::{
    assemble_base_sets, base_set_presets, build_lagged_matrix, derive_features, columns,
    BaseSetSpec, InputColumn, LagPolicy, RawInputs, VarLevel,
};
pub use matrix::{MatrixOrigin, MatrixParts, OutputRecipe, TrainingMatrix};
pub use smoothing::{
    block_average, block_average_series, denormalize_output, double_smooth, ema_smooth,
    normalize_output, normalized_difference_at,
};
pub use var::{
    grid_search_var_params, historical_var, historical_var_values, var_rank, GridCell, VarGrid,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::SeriesError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("need at least {needed} observations, got {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("window [{from}, {to}] outside series of length {len}")]
    IndexOutOfRange { from: i64, to: i64, len: usize },
    #[error("trailing three-sample mean is zero at position {index}")]
    ZeroTrailingMean { index: usize },
    #[error("base set {base_set} lag {lag}: {rows} rows after lagging, need {min}")]
    InsufficientRows {
        base_set: u8,
        lag: u32,
        rows: usize,
        min: usize,
    },
    #[error("training matrix invariant violated: {0}")]
    MalformedMatrix(String),
}

pub type Result<T> = std::result::Result<T, PreprocessError>;

/// Rolling historical VaR parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarConfig {
    /// Number of past returns in each window.
    pub window: usize,
    pub confidence: f64,
}

impl Default for VarConfig {
    fn default() -> Self {
        Self {
            window: 65,
            confidence: 0.95,
        }
    }
}

impl VarConfig {
    pub fn new(window: usize, confidence: f64) -> Result<Self> {
        let cfg = Self { window, confidence };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 20 {
            return Err(PreprocessError::InvalidConfig(format!(
                "VaR window {} below 20",
                self.window
            )));
        }
        if !(self.confidence > 0.5 && self.confidence < 1.0) {
            return Err(PreprocessError::InvalidConfig(format!(
                "VaR confidence {} outside (0.5, 1)",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Compound (exponential) moving average parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingConfig {
    pub beta: f64,
    /// Initial average. `None` seeds with the first observation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_value: Option<f64>,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            seed_value: None,
        }
    }
}

impl SmoothingConfig {
    pub fn new(beta: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            seed_value: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: f64) -> Self {
        self.seed_value = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(PreprocessError::InvalidConfig(format!(
                "smoothing beta {} outside (0, 1]",
                self.beta
            )));
        }
        if let Some(s) = self.seed_value {
            if !s.is_finite() {
                return Err(PreprocessError::InvalidConfig("non-finite seed".into()));
            }
        }
        Ok(())
    }
}

/// Centered block average of `m + 1` points whose middle sits `n` months
/// before the evaluation date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockAverageConfig {
    pub m: usize,
    pub n: usize,
}

impl BlockAverageConfig {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        let cfg = Self { m, n };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m.is_multiple_of(2) {
            return Err(PreprocessError::InvalidConfig(format!(
                "block average width M = {} must be even",
                self.m
            )));
        }
        if self.n == 0 {
            return Err(PreprocessError::InvalidConfig(
                "block average offset n must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn half_width(&self) -> usize {
        self.m / 2
    }

    /// True when the window never reaches past the evaluation date.
    pub fn is_causal(&self) -> bool {
        self.n >= self.half_width()
    }
}

/// Everything the feature and matrix stage needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    pub var: VarConfig,
    pub smoothing: SmoothingConfig,
    /// Block-average presets for the "moving averages of the VaR" columns.
    pub block_averages: Vec<BlockAverageConfig>,
    /// Lags used by base sets practiced over several lags.
    pub lags: Vec<u32>,
    /// Lag used by single-lag base sets.
    pub single_lag: u32,
    pub max_rows: usize,
    pub min_rows: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            var: VarConfig::default(),
            smoothing: SmoothingConfig::default(),
            block_averages: vec![
                BlockAverageConfig { m: 2, n: 1 },
                BlockAverageConfig { m: 4, n: 2 },
                BlockAverageConfig { m: 6, n: 3 },
            ],
            lags: (1..=10).collect(),
            single_lag: 1,
            max_rows: 89,
            min_rows: 30,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        self.var.validate()?;
        self.smoothing.validate()?;
        if self.block_averages.is_empty() {
            return Err(PreprocessError::InvalidConfig(
                "at least one block-average preset is required".into(),
            ));
        }
        for ba in &self.block_averages {
            ba.validate()?;
            if !ba.is_causal() {
                return Err(PreprocessError::InvalidConfig(format!(
                    "block average (M={}, n={}) would read past the evaluation date",
                    ba.m, ba.n
                )));
            }
        }
        if self.lags.is_empty() || self.lags.iter().any(|&l| l == 0 || l > 10) {
            return Err(PreprocessError::InvalidConfig(
                "lags must be non-empty and within 1..=10".into(),
            ));
        }
        if self.single_lag == 0 || self.single_lag > 10 {
            return Err(PreprocessError::InvalidConfig(
                "single_lag must be within 1..=10".into(),
            ));
        }
        if self.min_rows < 20 || self.max_rows < self.min_rows {
            return Err(PreprocessError::InvalidConfig(format!(
                "row limits min {} / max {} are inconsistent",
                self.min_rows, self.max_rows
            )));
        }
        Ok(())
    }
}
