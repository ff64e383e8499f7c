//! Exponential and block smoothing plus the normalized-difference output
//! transform and its inverse.

use super::{BlockAverageConfig, PreprocessError, Result, SmoothingConfig};
use crate::series::MonthlySeries;

/// `MA_t = beta * P_t + (1 - beta) * MA_{t-1}`, with `MA_0` taken from
/// `cfg.seed_value` or the first observation.
pub fn ema_smooth(values: &[f64], cfg: &SmoothingConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let Some(&first) = values.first() else {
        return Err(PreprocessError::InsufficientHistory {
            needed: 1,
            available: 0,
        });
    };
    let beta = cfg.beta;
    let mut prev = cfg.seed_value.unwrap_or(first);
    Ok(values
        .iter()
        .map(|&p| {
            prev = beta * p + (1.0 - beta) * prev;
            prev
        })
        .collect())
}

/// Two passes of [`ema_smooth`] with the same configuration.
pub fn double_smooth(values: &[f64], cfg: &SmoothingConfig) -> Result<Vec<f64>> {
    ema_smooth(&ema_smooth(values, cfg)?, cfg)
}

/// Mean of the `M + 1` values centered at `t - n`.
pub fn block_average(values: &[f64], cfg: &BlockAverageConfig, t: usize) -> Result<f64> {
    cfg.validate()?;
    let center = t as i64 - cfg.n as i64;
    let half = cfg.half_width() as i64;
    let (from, to) = (center - half, center + half);
    if from < 0 || to >= values.len() as i64 {
        return Err(PreprocessError::IndexOutOfRange {
            from,
            to,
            len: values.len(),
        });
    }
    let window = &values[from as usize..=to as usize];
    Ok(window.iter().sum::<f64>() / window.len() as f64)
}

/// [`block_average`] evaluated at every date where the window is complete
/// and does not extend past that date.
pub fn block_average_series(s: &MonthlySeries, cfg: &BlockAverageConfig) -> Result<MonthlySeries> {
    cfg.validate()?;
    let first = cfg.n + cfg.half_width();
    if !cfg.is_causal() {
        return Err(PreprocessError::InvalidConfig(format!(
            "block average (M={}, n={}) is not causal",
            cfg.m, cfg.n
        )));
    }
    if s.len() <= first {
        return Err(PreprocessError::InsufficientHistory {
            needed: first + 1,
            available: s.len(),
        });
    }
    let values = (first..s.len())
        .map(|t| block_average(s.values(), cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonthlySeries::new(
        format!("{}_ba{}_{}", s.name(), cfg.m, cfg.n),
        s.start().offset(first as i32),
        values,
    )?)
}

/// `(OUT_t - OUT_{t-1}) / mean(OUT_{t-1}, OUT_{t-2}, OUT_{t-3})` for `t >= 3`.
pub fn normalized_difference_at(out: &[f64], t: usize) -> Result<f64> {
    if t < 3 || t >= out.len() {
        return Err(PreprocessError::IndexOutOfRange {
            from: t as i64 - 3,
            to: t as i64,
            len: out.len(),
        });
    }
    let mean = (out[t - 1] + out[t - 2] + out[t - 3]) / 3.0;
    if mean == 0.0 {
        return Err(PreprocessError::ZeroTrailingMean { index: t });
    }
    Ok((out[t] - out[t - 1]) / mean)
}

/// Normalized difference of every sample that has three predecessors.
/// The result is three shorter than the input.
pub fn normalize_output(out: &[f64]) -> Result<Vec<f64>> {
    if out.len() < 4 {
        return Err(PreprocessError::InsufficientHistory {
            needed: 4,
            available: out.len(),
        });
    }
    (3..out.len())
        .map(|t| normalized_difference_at(out, t))
        .collect()
}

/// Invert the normalized difference. `recent` holds the three actuals
/// preceding the forecast date, oldest first; the last one is `OUT_{t-1}`.
pub fn denormalize_output(mod_value: f64, recent: &[f64; 3]) -> Result<f64> {
    let mean = recent.iter().sum::<f64>() / 3.0;
    if mean == 0.0 {
        return Err(PreprocessError::ZeroTrailingMean { index: 0 });
    }
    Ok(mod_value * mean + recent[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(b: f64) -> SmoothingConfig {
        SmoothingConfig::new(b).unwrap()
    }

    #[test]
    fn ema_beta_one_is_identity() {
        let x = [3.0, -1.0, 7.5, 2.0];
        assert_eq!(ema_smooth(&x, &beta(1.0)).unwrap(), x);
        assert_eq!(double_smooth(&x, &beta(1.0)).unwrap(), x);
    }

    #[test]
    fn ema_constant_fixed_point() {
        let x = [4.0; 6];
        assert_eq!(ema_smooth(&x, &beta(0.1)).unwrap(), x);
        assert_eq!(double_smooth(&x, &beta(0.1)).unwrap(), x);
    }

    #[test]
    fn ema_hand_unrolled() {
        let cfg = beta(0.1).with_seed(0.0);
        let once = ema_smooth(&[100.0, 100.0], &cfg).unwrap();
        assert!((once[0] - 10.0).abs() < 1e-12 && (once[1] - 19.0).abs() < 1e-12);
        let twice = double_smooth(&[100.0, 100.0], &cfg).unwrap();
        assert!((twice[0] - 1.0).abs() < 1e-12 && (twice[1] - 2.8).abs() < 1e-12);
    }

    #[test]
    fn ema_rejects_empty_and_bad_beta() {
        assert!(ema_smooth(&[], &beta(0.5)).is_err());
        assert!(SmoothingConfig::new(0.0).is_err());
        assert!(SmoothingConfig::new(1.5).is_err());
    }

    #[test]
    fn block_average_examples() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        let cfg = BlockAverageConfig::new(2, 2).unwrap();
        assert_eq!(block_average(&s, &cfg, 4).unwrap(), 3.0);
        let single = BlockAverageConfig::new(0, 1).unwrap();
        assert_eq!(block_average(&s, &single, 3).unwrap(), s[2]);
        assert!(matches!(
            block_average(&s, &cfg, 2),
            Err(PreprocessError::IndexOutOfRange { .. })
        ));
        assert!(BlockAverageConfig::new(3, 2).is_err());
    }

    #[test]
    fn block_average_series_dates() {
        use crate::series::MonthKey;
        let start = MonthKey::new(2000, 1).unwrap();
        let s = MonthlySeries::new("v", start, (0..10).map(f64::from).collect()).unwrap();
        let ba = block_average_series(&s, &BlockAverageConfig::new(4, 2).unwrap()).unwrap();
        assert_eq!(ba.start(), start.offset(4));
        assert_eq!(ba.len(), 6);
        // window for t = 4 is s[0..=4], centered at 2
        assert_eq!(ba.values()[0], 2.0);
        let non_causal = BlockAverageConfig::new(4, 1).unwrap();
        assert!(block_average_series(&s, &non_causal).is_err());
    }

    #[test]
    fn normalized_difference_examples() {
        assert_eq!(normalize_output(&[5.0; 7]).unwrap(), vec![0.0; 4]);
        let n = normalize_output(&[100.0, 100.0, 100.0, 110.0]).unwrap();
        assert_eq!(n.len(), 1);
        assert!((n[0] - 0.1).abs() < 1e-15);
        assert_eq!(
            normalize_output(&[0.0, 0.0, 0.0, 5.0]),
            Err(PreprocessError::ZeroTrailingMean { index: 3 })
        );
        assert!(normalize_output(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn denormalize_examples() {
        let r = [100.0, 100.0, 100.0];
        assert!((denormalize_output(0.1, &r).unwrap() - 110.0).abs() < 1e-12);
        assert_eq!(denormalize_output(0.0, &[90.0, 95.0, 97.0]).unwrap(), 97.0);
        assert!(denormalize_output(1.0, &[0.0, 0.0, 0.0]).is_err());
    }
}
