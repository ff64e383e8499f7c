//! Rolling historical VaR and the window/beta backtest grid.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::smoothing::ema_smooth;
use super::{PreprocessError, Result, SmoothingConfig, VarConfig};
use crate::metrics::{count_outliers, mean_abs_error};
use crate::series::MonthlySeries;

/// 1-based rank of the order statistic used as the VaR quantile:
/// `max(1, floor((1 - confidence) * window))`.
pub fn var_rank(window: usize, confidence: f64) -> usize {
    // The epsilon keeps exact products such as 0.05 * 60 from flooring to 2.
    let k = ((1.0 - confidence) * window as f64 + 1e-9).floor() as usize;
    k.clamp(1, window)
}

/// One VaR value per complete window of `cfg.window` returns. Entry `i`
/// summarizes `returns_bp[i..i + window]` and is the band for the return
/// that follows it.
pub fn historical_var_values(returns_bp: &[f64], cfg: &VarConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if returns_bp.len() < cfg.window {
        return Err(PreprocessError::InsufficientHistory {
            needed: cfg.window,
            available: returns_bp.len(),
        });
    }
    let k = var_rank(cfg.window, cfg.confidence);
    let mut scratch = vec![0.0; cfg.window];
    Ok(returns_bp
        .windows(cfg.window)
        .map(|w| {
            scratch.copy_from_slice(w);
            let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
            -*kth
        })
        .collect())
}

/// Dated VaR series: each value is stamped with the month of the last return
/// in its window, i.e. the month at whose close it becomes known.
pub fn historical_var(returns_bp: &MonthlySeries, cfg: &VarConfig) -> Result<MonthlySeries> {
    let values = historical_var_values(returns_bp.values(), cfg)?;
    let start = returns_bp.start().offset(cfg.window as i32 - 1);
    Ok(MonthlySeries::new(
        format!("{}_var", returns_bp.name()),
        start,
        values,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub window: usize,
    pub beta: f64,
    /// Mean absolute error between the band and realized falls.
    pub eam: f64,
    pub outliers: usize,
    pub evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarGrid {
    pub cells: Vec<GridCell>,
    /// Index into `cells` of the lowest-EAM cell (first on ties).
    pub best: usize,
}

impl VarGrid {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    pub fn cell(&self, window: usize, beta: f64) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.window == window && c.beta == beta)
    }
}

/// Backtest every `(window, beta)` pair on a common evaluation range.
///
/// The band for return `t` is the (optionally smoothed) VaR of the window
/// ending at `t - 1`; the realized fall is `-returns_bp[t]`. All cells are
/// scored over the same trailing range: the returns after the largest
/// window, limited to the last `evaluation_len` when given. `beta = 1`
/// reproduces the unsmoothed band.
pub fn grid_search_var_params(
    returns_bp: &[f64],
    windows: RangeInclusive<usize>,
    betas: &[f64],
    confidence: f64,
    evaluation_len: Option<usize>,
) -> Result<VarGrid> {
    let max_window = *windows.end();
    if windows.is_empty() || betas.is_empty() {
        return Err(PreprocessError::InvalidConfig("empty search grid".into()));
    }
    if returns_bp.len() <= max_window {
        return Err(PreprocessError::InsufficientHistory {
            needed: max_window + 1,
            available: returns_bp.len(),
        });
    }
    let mut eval_start = max_window;
    if let Some(n) = evaluation_len {
        eval_start = eval_start.max(returns_bp.len().saturating_sub(n));
    }
    let falls: Vec<f64> = returns_bp[eval_start..].iter().map(|r| -r).collect();

    let mut cells = Vec::new();
    for window in windows {
        let cfg = VarConfig { window, confidence };
        let raw = historical_var_values(returns_bp, &cfg)?;
        for &beta in betas {
            let band = ema_smooth(&raw, &SmoothingConfig::new(beta)?)?;
            // band[i] forecasts return index i + window
            let aligned = &band[eval_start - window..returns_bp.len() - window];
            cells.push(GridCell {
                window,
                beta,
                eam: mean_abs_error(aligned, &falls)
                    .map_err(|e| PreprocessError::InvalidConfig(e.to_string()))?,
                outliers: count_outliers(&falls, aligned)
                    .map_err(|e| PreprocessError::InvalidConfig(e.to_string()))?,
                evaluated: falls.len(),
            });
        }
    }
    let best = cells
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.eam.total_cmp(&b.1.eam))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(VarGrid { cells, best })
}
