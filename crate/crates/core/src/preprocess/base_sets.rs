//! Feature frame derivation and the ten base-set presets.

use serde::{Deserialize, Serialize};

use super::matrix::{MatrixOrigin, MatrixParts, OutputRecipe, TrainingMatrix};
use super::smoothing::{block_average_series, double_smooth, ema_smooth, normalized_difference_at};
use super::var::historical_var;
use super::{PreprocessConfig, PreprocessError, Result};
use crate::series::{align, log_returns, to_basis_points, AlignedFrame, MonthKey, MonthlySeries};

/// Column names of the feature frame.
pub mod columns {
    pub const IGAEM: &str = "igaem";
    pub const TARGET: &str = "embi_vzla";
    pub const GLOBAL: &str = "embi_global";
    pub const TBILL: &str = "tbill";
    pub const TARGET_SMOOTHED: &str = "embi_vzla_smooth";
}

/// The four source variables, each on its own (possibly longer) calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInputs {
    /// Leading economic indicator, levels.
    pub igaem: MonthlySeries,
    /// Country spread to forecast.
    pub target: MonthlySeries,
    pub global: MonthlySeries,
    pub tbill: MonthlySeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarLevel {
    Raw,
    Smoothed,
    DoubleSmoothed,
}

impl VarLevel {
    const ALL: [VarLevel; 3] = [VarLevel::Raw, VarLevel::Smoothed, VarLevel::DoubleSmoothed];

    fn column(self) -> &'static str {
        match self {
            VarLevel::Raw => "var_raw",
            VarLevel::Smoothed => "var_smooth",
            VarLevel::DoubleSmoothed => "var_double",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputColumn {
    Var(VarLevel),
    /// Block average of a VaR level using the given preset index.
    BlockAverage { level: VarLevel, preset: usize },
    Global,
    TBill,
    SmoothedTarget,
}

impl InputColumn {
    pub fn column_name(&self) -> String {
        match self {
            InputColumn::Var(level) => level.column().to_string(),
            InputColumn::BlockAverage { level, preset } => format!("{}_ba{}", level.column(), preset),
            InputColumn::Global => columns::GLOBAL.to_string(),
            InputColumn::TBill => columns::TBILL.to_string(),
            InputColumn::SmoothedTarget => columns::TARGET_SMOOTHED.to_string(),
        }
    }

    pub fn is_var_derived(&self) -> bool {
        matches!(self, InputColumn::Var(_) | InputColumn::BlockAverage { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagPolicy {
    /// One matrix at the configured single lag.
    Single,
    /// One matrix per configured lag.
    Each,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSetSpec {
    pub id: u8,
    pub inputs: Vec<InputColumn>,
    pub output: OutputRecipe,
    pub lag_policy: LagPolicy,
}

impl BaseSetSpec {
    pub fn lags(&self, cfg: &PreprocessConfig) -> Vec<u32> {
        match self.lag_policy {
            LagPolicy::Single => vec![cfg.single_lag],
            LagPolicy::Each => cfg.lags.clone(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        self.inputs.iter().map(InputColumn::column_name).collect()
    }

    /// Input values observed at `month`.
    pub fn input_row(&self, frame: &AlignedFrame, month: MonthKey) -> Result<Vec<f64>> {
        let row = frame.row_of(month).ok_or(PreprocessError::IndexOutOfRange {
            from: month.months_since(frame.start()) as i64,
            to: month.months_since(frame.start()) as i64,
            len: frame.len(),
        })?;
        self.column_names()
            .iter()
            .map(|c| Ok(frame.column(c)?[row]))
            .collect()
    }
}

/// The ten standard base sets. `n_presets` is the number of block-average
/// presets; sets 3 and 4 use all of them, sets 5 and 6 only the first.
pub fn base_set_presets(n_presets: usize) -> Vec<BaseSetSpec> {
    use InputColumn::*;
    use VarLevel::*;
    let all_ba = |level| (0..n_presets).map(move |preset| BlockAverage { level, preset });
    let spec = |id, inputs: Vec<InputColumn>, output, lag_policy| BaseSetSpec {
        id,
        inputs,
        output,
        lag_policy,
    };
    let raw = OutputRecipe::Raw;
    let norm = OutputRecipe::NormalizedDifference;
    vec![
        spec(1, vec![Var(Raw), Global, TBill], raw, LagPolicy::Each),
        spec(2, vec![Var(Smoothed), Global, TBill], raw, LagPolicy::Each),
        spec(
            3,
            std::iter::once(Var(DoubleSmoothed)).chain(all_ba(DoubleSmoothed)).collect(),
            raw,
            LagPolicy::Single,
        ),
        spec(
            4,
            std::iter::once(Var(Smoothed)).chain(all_ba(Smoothed)).collect(),
            raw,
            LagPolicy::Single,
        ),
        spec(
            5,
            vec![Var(DoubleSmoothed), BlockAverage { level: DoubleSmoothed, preset: 0 }, Global],
            raw,
            LagPolicy::Single,
        ),
        spec(
            6,
            vec![Var(Smoothed), BlockAverage { level: Smoothed, preset: 0 }, Global],
            raw,
            LagPolicy::Single,
        ),
        spec(7, vec![Global, TBill], raw, LagPolicy::Each),
        spec(8, vec![Var(Raw), Global, TBill], norm, LagPolicy::Each),
        spec(9, vec![Var(Smoothed), Global, TBill], norm, LagPolicy::Each),
        spec(
            10,
            vec![Var(Smoothed), Global, TBill, SmoothedTarget],
            norm,
            LagPolicy::Each,
        ),
    ]
}

/// Compute every feature column and align them on the common months.
///
/// The VaR and its smoothings run over the indicator's full history before
/// alignment, so a long indicator record feeds complete windows into the
/// shorter target range.
pub fn derive_features(inputs: &RawInputs, cfg: &PreprocessConfig) -> Result<AlignedFrame> {
    cfg.validate()?;
    let returns = to_basis_points(&log_returns(&inputs.igaem)?);
    let var_raw = historical_var(&returns, &cfg.var)?;
    let var_smooth = ema_smooth(var_raw.values(), &cfg.smoothing)?;
    let var_double = double_smooth(var_raw.values(), &cfg.smoothing)?;

    let mut series = vec![
        inputs.igaem.clone().renamed(columns::IGAEM),
        inputs.target.clone().renamed(columns::TARGET),
        inputs.global.clone().renamed(columns::GLOBAL),
        inputs.tbill.clone().renamed(columns::TBILL),
    ];
    let levels = [
        var_raw.clone(),
        var_raw.with_values("", var_smooth)?,
        var_raw.with_values("", var_double)?,
    ];
    for (level, s) in VarLevel::ALL.iter().zip(&levels) {
        series.push(s.clone().renamed(level.column()));
        for (i, ba) in cfg.block_averages.iter().enumerate() {
            let col = InputColumn::BlockAverage { level: *level, preset: i }.column_name();
            series.push(block_average_series(s, ba)?.renamed(col));
        }
    }
    let target_smooth = ema_smooth(inputs.target.values(), &cfg.smoothing)?;
    series.push(inputs.target.with_values(columns::TARGET_SMOOTHED, target_smooth)?);
    Ok(align(&series)?)
}

/// Pair input rows dated `m` with targets dated `m + lag`.
///
/// Every output row needs three earlier target values (for the normalized
/// recipe, denormalization and scoring), so outputs start at the fourth frame
/// month at the earliest. Only the latest `cfg.max_rows` rows are kept.
pub fn build_lagged_matrix(
    frame: &AlignedFrame,
    spec: &BaseSetSpec,
    lag: u32,
    cfg: &PreprocessConfig,
) -> Result<TrainingMatrix> {
    let target = frame.column(columns::TARGET)?;
    let names = spec.column_names();
    let cols = names
        .iter()
        .map(|c| frame.column(c))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let lag_us = lag as usize;
    let first_out = lag_us.max(3);
    let available = frame.len().saturating_sub(first_out);
    let rows = available.min(cfg.max_rows);
    if rows < cfg.min_rows {
        return Err(PreprocessError::InsufficientRows {
            base_set: spec.id,
            lag,
            rows,
            min: cfg.min_rows,
        });
    }
    let out_range = frame.len() - rows..frame.len();

    let mut parts = MatrixParts {
        origin: MatrixOrigin::BaseSet(spec.id),
        lag,
        input_names: names,
        inputs: Vec::with_capacity(rows),
        output: Vec::with_capacity(rows),
        months_out: Vec::with_capacity(rows),
        recipe: spec.output,
        actual: Vec::with_capacity(rows),
        history: Vec::with_capacity(rows),
    };
    for j in out_range {
        let i = j - lag_us;
        parts.inputs.push(cols.iter().map(|c| c[i]).collect());
        parts.output.push(match spec.output {
            OutputRecipe::Raw => target[j],
            OutputRecipe::NormalizedDifference => normalized_difference_at(target, j)?,
        });
        parts.months_out.push(frame.month_at(j));
        parts.actual.push(target[j]);
        parts.history.push([target[j - 3], target[j - 2], target[j - 1]]);
    }
    TrainingMatrix::new(parts)
}

/// Every matrix of every spec, in spec order then lag order.
pub fn assemble_base_sets(
    frame: &AlignedFrame,
    specs: &[BaseSetSpec],
    cfg: &PreprocessConfig,
) -> Result<Vec<TrainingMatrix>> {
    let mut seen = std::collections::HashSet::new();
    for s in specs {
        if !seen.insert(s.id) {
            return Err(PreprocessError::InvalidConfig(format!(
                "duplicate base set id {}",
                s.id
            )));
        }
    }
    for required in [columns::TARGET, columns::GLOBAL, columns::TBILL] {
        frame.column(required)?;
    }
    let mut out = Vec::new();
    for spec in specs {
        for lag in spec.lags(cfg) {
            out.push(build_lagged_matrix(frame, spec, lag, cfg)?);
        }
    }
    Ok(out)
}
