use rayon::prelude::*;

use super::train::{split, train};
use super::{derive_seed, NetworkModel, NeuralError, Result, TrainConfig};
use crate::metrics::{score_forecasts, Ism, MetricsError};
use crate::preprocess::TrainingMatrix;

/// Ranks a model by its level forecasts over a test range.
pub trait Scorer: Sync {
    fn score(&self, forecasts: &[f64], test: &TrainingMatrix) -> std::result::Result<Ism, MetricsError>;
}

/// Modified Sharpe Index of the test-range forecasts.
#[derive(Debug, Clone, Copy, Default)]
pub struct OutOfSampleIsm;

impl Scorer for OutOfSampleIsm {
    fn score(&self, forecasts: &[f64], test: &TrainingMatrix) -> std::result::Result<Ism, MetricsError> {
        let report = score_forecasts(
            forecasts,
            test.actual(),
            &test.previous_actual(),
            Some(test.months_out()),
        )?;
        crate::metrics::modified_sharpe(&report)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedModel {
    pub restart: usize,
    pub seed: u64,
    pub model: NetworkModel,
    pub epochs: usize,
    pub score: Ism,
    /// Level forecasts (raw target units) for each test row.
    pub test_forecasts: Vec<f64>,
}

/// Level forecasts of `model` for every row of `rows`.
pub fn forecast_levels(model: &NetworkModel, rows: &TrainingMatrix) -> Result<Vec<f64>> {
    rows.inputs()
        .iter()
        .enumerate()
        .map(|(i, r)| Ok(rows.to_level(i, model.forward(r)?)?))
        .collect()
}

/// Train `cfg.restarts` networks from seeds derived from `cfg.rng_seed`,
/// score each on the test split and return them best first. Restarts whose
/// loss diverges are dropped; ties keep restart order.
pub fn multi_restart_train<S: Scorer>(
    matrix: &TrainingMatrix,
    cfg: &TrainConfig,
    scorer: &S,
) -> Result<Vec<RankedModel>> {
    let (train_rows, test_rows) = split(matrix, cfg)?;
    let outcomes: Vec<Result<Option<RankedModel>>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let seed = derive_seed(cfg.rng_seed, restart as u64);
            let fitted = match train(&train_rows, &cfg.with_seed(seed)) {
                Ok(f) => f,
                Err(NeuralError::DivergedTraining) => return Ok(None),
                Err(e) => return Err(e),
            };
            let test_forecasts = forecast_levels(&fitted.model, &test_rows)?;
            let score = scorer.score(&test_forecasts, &test_rows)?;
            Ok(Some(RankedModel {
                restart,
                seed,
                model: fitted.model,
                epochs: fitted.epochs,
                score,
                test_forecasts,
            }))
        })
        .collect();
    let mut ranked = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        if let Some(m) = o? {
            ranked.push(m);
        }
    }
    if ranked.is_empty() {
        return Err(NeuralError::AllDiverged);
    }
    ranked.sort_by(|a, b| b.score.cmp(&a.score).then(a.restart.cmp(&b.restart)));
    Ok(ranked)
}
