//! Simple least-squares regression in centered form,
//! `y_hat = intercept + slope * (x - x_mean)`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{check_lengths, MetricsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    /// Fitted value at `x_mean` (equal to the mean of `y`).
    pub intercept: f64,
    pub x_mean: f64,
    /// Multiple correlation coefficient, `|corr(x, y)|`.
    pub r: f64,
    pub r_squared: f64,
    pub t_statistic: f64,
    /// Two-sided p-value of the slope.
    pub p_value: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * (x - self.x_mean)
    }

    /// Intercept of the uncentered form `a + b x`.
    pub fn origin_intercept(&self) -> f64 {
        self.intercept - self.slope * self.x_mean
    }
}

/// Two-sided p-value for a t statistic with `df` degrees of freedom.
pub fn slope_p_value(t_statistic: f64, df: f64) -> f64 {
    if t_statistic.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t_statistic.abs()))).clamp(0.0, 1.0)
}

pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    check_lengths(x.len(), y.len())?;
    let n = x.len();
    if n < 3 {
        return Err(MetricsError::TooShort { needed: 3, got: n });
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - x_mean, yi - y_mean);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(MetricsError::ConstantRegressor);
    }
    let slope = sxy / sxx;
    let r = if syy == 0.0 {
        0.0
    } else {
        (sxy.abs() / (sxx * syy).sqrt()).min(1.0)
    };
    let r_squared = r * r;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let e = yi - (y_mean + slope * (xi - x_mean));
            e * e
        })
        .sum();
    let df = nf - 2.0;
    let se = (sse / df / sxx).sqrt();
    let t_statistic = if se == 0.0 {
        if slope == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(slope)
        }
    } else {
        slope / se
    };
    Ok(RegressionResult {
        slope,
        intercept: y_mean,
        x_mean,
        r,
        r_squared,
        t_statistic,
        p_value: slope_p_value(t_statistic, df),
        n,
    })
}
