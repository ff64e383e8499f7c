//! Equity and perfect-equity curves and the Modified Sharpe Index.
//!
//! A level forecast becomes a position by comparing it with the last
//! observed actual: long when a rise (or no change) is forecast, short
//! otherwise. The strategy's monthly return is the log change of the actual
//! series. Curves are kept in percent units; failure magnitudes are absolute
//! log returns.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_lengths, MetricsError, Result};
use crate::series::MonthKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Long,
    Short,
}

impl Position {
    /// Long when `forecast >= last_actual`.
    pub fn from_forecast(forecast: f64, last_actual: f64) -> Self {
        Self::from_change(forecast - last_actual)
    }

    /// Long for non-negative changes.
    pub fn from_change(change: f64) -> Self {
        if change >= 0.0 {
            Position::Long
        } else {
            Position::Short
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Position::Long => 1.0,
            Position::Short => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Position::Long => Position::Short,
            Position::Short => Position::Long,
        }
    }
}

/// A date on which the position lost money.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub month: Option<MonthKey>,
    /// `|return|` of the losing month.
    pub magnitude: f64,
}

/// Modified Sharpe Index, or the sentinel for a strategy that never failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ism {
    Finite(f64),
    PerfectStrategy,
}

impl Ism {
    pub fn value(self) -> Option<f64> {
        match self {
            Ism::Finite(v) => Some(v),
            Ism::PerfectStrategy => None,
        }
    }

    pub fn is_perfect(self) -> bool {
        matches!(self, Ism::PerfectStrategy)
    }
}

impl Eq for Ism {}

impl PartialOrd for Ism {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ism {
    /// The perfect-strategy sentinel sorts above every finite value.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ism::PerfectStrategy, Ism::PerfectStrategy) => Ordering::Equal,
            (Ism::PerfectStrategy, _) => Ordering::Greater,
            (_, Ism::PerfectStrategy) => Ordering::Less,
            (Ism::Finite(a), Ism::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl fmt::Display for Ism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ism::Finite(v) => write!(f, "{v:.4}"),
            Ism::PerfectStrategy => f.write_str("perfect"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquityReport {
    /// Dates of each step; empty when the caller supplied none.
    pub months: Vec<MonthKey>,
    pub positions: Vec<Position>,
    /// Realized log returns.
    pub returns: Vec<f64>,
    pub eq: Vec<f64>,
    pub pe: Vec<f64>,
    pub failures: Vec<Failure>,
    pub ave_negative_vol: f64,
    /// `m_eq / m_pe`, filled by [`EquityReport::scored`].
    pub q_ratio: Option<f64>,
    pub ism: Option<Ism>,
}

impl EquityReport {
    /// Compute Q and the ISM and store them on the report.
    pub fn scored(mut self) -> Result<Self> {
        let (q, ism) = q_and_ism(&self)?;
        self.q_ratio = Some(q);
        self.ism = Some(ism);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Build curves from level forecasts, realized levels and the realized
/// level one month before each forecast date.
pub fn score_forecasts(
    predicted: &[f64],
    actual: &[f64],
    previous: &[f64],
    months: Option<&[MonthKey]>,
) -> Result<EquityReport> {
    check_lengths(predicted.len(), actual.len())?;
    check_lengths(predicted.len(), previous.len())?;
    if let Some(m) = months {
        check_lengths(m.len(), predicted.len())?;
    }
    if predicted.is_empty() {
        return Err(MetricsError::TooShort { needed: 1, got: 0 });
    }
    for values in [actual, previous] {
        if let Some(index) = values.iter().position(|v| *v <= 0.0) {
            return Err(MetricsError::NonPositiveValue { index });
        }
    }

    let n = predicted.len();
    let mut report = EquityReport {
        months: months.map(<[MonthKey]>::to_vec).unwrap_or_default(),
        positions: Vec::with_capacity(n),
        returns: Vec::with_capacity(n),
        eq: Vec::with_capacity(n),
        pe: Vec::with_capacity(n),
        failures: Vec::new(),
        ave_negative_vol: 0.0,
        q_ratio: None,
        ism: None,
    };
    let (mut eq, mut pe) = (0.0, 0.0);
    for i in 0..n {
        let position = Position::from_forecast(predicted[i], previous[i]);
        let ret = (actual[i] / previous[i]).ln();
        let signed = position.sign() * ret;
        eq += signed * 100.0;
        pe += ret.abs() * 100.0;
        if signed < 0.0 {
            report.failures.push(Failure {
                index: i,
                month: months.map(|m| m[i]),
                magnitude: ret.abs(),
            });
        }
        report.positions.push(position);
        report.returns.push(ret);
        report.eq.push(eq);
        report.pe.push(pe);
    }
    if !report.failures.is_empty() {
        report.ave_negative_vol = report.failures.iter().map(|f| f.magnitude).sum::<f64>()
            / report.failures.len() as f64;
    }
    Ok(report)
}

/// Curves over consecutive dates: `actual[0]` is the base level and each
/// later `predicted[t]` is judged against `actual[t - 1]`.
pub fn equity_curves(predicted: &[f64], actual: &[f64]) -> Result<EquityReport> {
    check_lengths(predicted.len(), actual.len())?;
    if actual.len() < 2 {
        return Err(MetricsError::TooShort {
            needed: 2,
            got: actual.len(),
        });
    }
    score_forecasts(&predicted[1..], &actual[1..], &actual[..actual.len() - 1], None)
}

/// Least-squares slope of `curve_i * (1 + 10 i / n)` against `i = 1..n`.
pub fn weighted_slope(curve: &[f64]) -> Result<f64> {
    let n = curve.len();
    if n < 2 {
        return Err(MetricsError::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let x_mean = (nf + 1.0) / 2.0;
    let amplified = curve
        .iter()
        .enumerate()
        .map(|(k, c)| c * (1.0 + 10.0 * (k + 1) as f64 / nf));
    let y_mean = amplified.clone().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in amplified.enumerate() {
        let dx = (k + 1) as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

fn q_and_ism(report: &EquityReport) -> Result<(f64, Ism)> {
    let m_pe = weighted_slope(&report.pe)?;
    if m_pe == 0.0 {
        return Err(MetricsError::ZeroPerfectSlope);
    }
    let q = weighted_slope(&report.eq)? / m_pe;
    if report.failures.is_empty() {
        return Ok((q, Ism::PerfectStrategy));
    }
    Ok((q, Ism::Finite(q / report.ave_negative_vol)))
}

/// `ISM = (m_eq / m_pe) / ave_negative_vol`.
pub fn modified_sharpe(report: &EquityReport) -> Result<Ism> {
    q_and_ism(report).map(|(_, ism)| ism)
}
