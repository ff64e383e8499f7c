//! Forecast scoring: equity curves and the Modified Sharpe Index, the Excess
//! Predictability market-timing test, hit rates, ensemble vote splits, VaR
//! backtest counts and the least-squares baseline.

mod equity;
mod regression;
mod timing;

pub use equity::{
    equity_curves, modified_sharpe, score_forecasts, weighted_slope, EquityReport, Failure, Ism,
    Position,
};
pub use regression::{ols_fit, slope_p_value, RegressionResult};
pub use timing::{
    directional_accuracy, divergence_percentage, excess_predictability,
    excess_predictability_from, EpResult,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-positive actual value at position {index}")]
    NonPositiveValue { index: usize },
    #[error("perfect-equity slope is zero (constant actuals)")]
    ZeroPerfectSlope,
    #[error("every position has the same sign")]
    DegenerateStrategy,
    #[error("realized returns are constant")]
    ConstantReturns,
    #[error("no networks supplied")]
    EmptyEnsemble,
    #[error("regressor is constant")]
    ConstantRegressor,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

pub(crate) fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(MetricsError::LengthMismatch { left, right });
    }
    Ok(())
}

/// `(1/n) * sum |estimated_i - real_i|`.
pub fn mean_abs_error(estimated: &[f64], real: &[f64]) -> Result<f64> {
    check_lengths(estimated.len(), real.len())?;
    if estimated.is_empty() {
        return Err(MetricsError::TooShort { needed: 1, got: 0 });
    }
    let total: f64 = estimated.iter().zip(real).map(|(e, r)| (e - r).abs()).sum();
    Ok(total / estimated.len() as f64)
}

/// Dates where the realized fall exceeds the VaR band.
pub fn count_outliers(falls: &[f64], band: &[f64]) -> Result<usize> {
    check_lengths(falls.len(), band.len())?;
    Ok(falls.iter().zip(band).filter(|(f, b)| f > b).count())
}
