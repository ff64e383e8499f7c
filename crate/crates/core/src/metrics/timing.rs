//! Market-timing statistics: Excess Predictability, directional hit rate and
//! the ensemble's per-date vote split.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_lengths, MetricsError, Position, Result};

/// Minimum sample size accepted by [`excess_predictability_from`].
pub const EP_MIN_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpResult {
    /// `(1/T) sum s_t y_t`
    pub a_t: f64,
    /// `((1/T) sum s_t) * ((1/T) sum y_t)`
    pub b_t: f64,
    pub variance_hat: f64,
    pub statistic: f64,
    /// `100 * Phi(statistic)`
    pub norm_ep: f64,
}

/// Excess Predictability of a long/short strategy over realized returns.
///
/// With `p = (1 + mean(s)) / 2`, the variance estimator is
/// `4 / T^2 * p (1 - p) * sum (y_t - mean(y))^2`.
pub fn excess_predictability_from(positions: &[Position], returns: &[f64]) -> Result<EpResult> {
    check_lengths(positions.len(), returns.len())?;
    let t = returns.len();
    if t < EP_MIN_LEN {
        return Err(MetricsError::TooShort {
            needed: EP_MIN_LEN,
            got: t,
        });
    }
    let tf = t as f64;
    let s_mean = positions.iter().map(|p| p.sign()).sum::<f64>() / tf;
    let y_mean = returns.iter().sum::<f64>() / tf;
    let a_t = positions
        .iter()
        .zip(returns)
        .map(|(p, y)| p.sign() * y)
        .sum::<f64>()
        / tf;
    let b_t = s_mean * y_mean;
    let p_hat = 0.5 * (1.0 + s_mean);
    if positions.iter().all(|p| *p == positions[0]) {
        return Err(MetricsError::DegenerateStrategy);
    }
    let ss = returns.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>();
    if ss == 0.0 {
        return Err(MetricsError::ConstantReturns);
    }
    let variance_hat = 4.0 / (tf * tf) * p_hat * (1.0 - p_hat) * ss;
    let statistic = (a_t - b_t) / variance_hat.sqrt();
    Ok(EpResult {
        a_t,
        b_t,
        variance_hat,
        statistic,
        norm_ep: standard_normal_cdf(statistic) * 100.0,
    })
}

/// Level-forecast form: `actual[0]` is the base level, later entries are
/// scored as in [`super::equity_curves`].
pub fn excess_predictability(predicted: &[f64], actual: &[f64]) -> Result<EpResult> {
    check_lengths(predicted.len(), actual.len())?;
    if actual.len() < 2 {
        return Err(MetricsError::TooShort {
            needed: 2,
            got: actual.len(),
        });
    }
    let mut positions = Vec::with_capacity(actual.len() - 1);
    let mut returns = Vec::with_capacity(actual.len() - 1);
    for t in 1..actual.len() {
        if actual[t] <= 0.0 || actual[t - 1] <= 0.0 {
            return Err(MetricsError::NonPositiveValue { index: t });
        }
        positions.push(Position::from_forecast(predicted[t], actual[t - 1]));
        returns.push((actual[t] / actual[t - 1]).ln());
    }
    excess_predictability_from(&positions, &returns)
}

fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Share of dates whose predicted change has the realized change's
/// direction (zero counts as up).
pub fn directional_accuracy(predicted_change: &[f64], actual_change: &[f64]) -> Result<f64> {
    check_lengths(predicted_change.len(), actual_change.len())?;
    if predicted_change.is_empty() {
        return Err(MetricsError::TooShort { needed: 1, got: 0 });
    }
    let hits = predicted_change
        .iter()
        .zip(actual_change)
        .filter(|(p, a)| Position::from_change(**p) == Position::from_change(**a))
        .count();
    Ok(hits as f64 / predicted_change.len() as f64)
}

/// Percentage of networks voting long on each date. `votes[k][t]` is network
/// `k`'s position for date `t`.
pub fn divergence_percentage(votes: &[Vec<Position>]) -> Result<Vec<f64>> {
    let first = votes.first().ok_or(MetricsError::EmptyEnsemble)?;
    for v in votes {
        check_lengths(v.len(), first.len())?;
    }
    let n = votes.len() as f64;
    Ok((0..first.len())
        .map(|t| {
            let up = votes.iter().filter(|v| v[t] == Position::Long).count();
            up as f64 * 100.0 / n
        })
        .collect())
}
