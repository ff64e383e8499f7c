//! Second-stage stacking: pick the strongest base networks by their
//! out-of-sample score and train a master network on their forecasts.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{
    excess_predictability_from, score_forecasts, EpResult, EquityReport, Ism, MetricsError,
    Position,
};
use crate::neural::{multi_restart_train, NetworkModel, NeuralError, OutOfSampleIsm, RankedModel, TrainConfig};
use crate::preprocess::{MatrixOrigin, MatrixParts, OutputRecipe, PreprocessError, TrainingMatrix};
use crate::series::{MonthKey, MonthlySeries};

/// Default number of networks stacked under the master.
pub const DEFAULT_MEMBERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("no candidate networks to select from")]
    NoCandidates,
    #[error("member forecasts share no dates")]
    DateMismatch,
    #[error("target series has no value for {0}")]
    MissingTarget(MonthKey),
    #[error("expected {expected} member forecasts, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

pub type Result<T> = std::result::Result<T, EnsembleError>;

/// Test-range performance of a set of level forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: EquityReport,
    pub ism: Ism,
    /// `None` when the statistic is undefined (one-sided positions, short range).
    pub ep: Option<EpResult>,
}

impl Evaluation {
    pub fn norm_ep(&self) -> Option<f64> {
        self.ep.map(|e| e.norm_ep)
    }
}

/// Score level forecasts over the rows of `test`.
pub fn evaluate(forecasts: &[f64], test: &TrainingMatrix) -> Result<Evaluation> {
    evaluate_levels(forecasts, test.actual(), &test.previous_actual(), test.months_out())
}

/// Score level forecasts given the realized level and the level one month
/// earlier for each date.
pub fn evaluate_levels(
    forecasts: &[f64],
    actual: &[f64],
    previous: &[f64],
    months: &[MonthKey],
) -> Result<Evaluation> {
    let report = score_forecasts(forecasts, actual, previous, Some(months))?.scored()?;
    let ism = report.ism.expect("scored report carries an ISM");
    let ep = excess_predictability_from(&report.positions, &report.returns).ok();
    Ok(Evaluation { report, ism, ep })
}

/// A trained base network with its out-of-sample forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub base_set_id: u8,
    pub lag: u32,
    pub recipe: OutputRecipe,
    pub seed: u64,
    pub epochs: usize,
    pub model: NetworkModel,
    pub ism: Ism,
    pub norm_ep: Option<f64>,
    pub test_months: Vec<MonthKey>,
    /// Level forecasts in raw target units.
    pub test_forecasts: Vec<f64>,
    pub test_actual: Vec<f64>,
    pub test_previous: Vec<f64>,
}

impl Candidate {
    /// Wrap the best restart trained on `matrix`.
    pub fn from_ranked(matrix: &TrainingMatrix, test: &TrainingMatrix, best: &RankedModel) -> Result<Self> {
        let base_set_id = matrix.origin().base_set_id().unwrap_or(0);
        let eval = evaluate(&best.test_forecasts, test)?;
        Ok(Self {
            base_set_id,
            lag: matrix.lag(),
            recipe: matrix.recipe(),
            seed: best.seed,
            epochs: best.epochs,
            model: best.model.clone(),
            ism: eval.ism,
            norm_ep: eval.norm_ep(),
            test_months: test.months_out().to_vec(),
            test_forecasts: best.test_forecasts.clone(),
            test_actual: test.actual().to_vec(),
            test_previous: test.previous_actual(),
        })
    }

    /// Recompute the test-range scores from the stored forecasts.
    pub fn evaluation(&self) -> Result<Evaluation> {
        evaluate_levels(&self.test_forecasts, &self.test_actual, &self.test_previous, &self.test_months)
    }

    pub fn label(&self) -> String {
        format!("bs{:02}_lag{:02}", self.base_set_id, self.lag)
    }

    pub fn forecast_at(&self, month: MonthKey) -> Option<f64> {
        self.test_months
            .binary_search(&month)
            .ok()
            .map(|i| self.test_forecasts[i])
    }
}

/// Selection order: ISM, then norm_EP (missing lowest), both descending,
/// then lower base set id, then lower lag.
pub fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    let ep = |c: &Candidate| c.norm_ep.unwrap_or(f64::NEG_INFINITY);
    b.ism
        .cmp(&a.ism)
        .then_with(|| ep(b).total_cmp(&ep(a)))
        .then(a.base_set_id.cmp(&b.base_set_id))
        .then(a.lag.cmp(&b.lag))
}

/// The best `k` candidates in rank order.
pub fn select_best(candidates: &[Candidate], k: usize) -> Result<Vec<Candidate>> {
    if candidates.is_empty() {
        return Err(EnsembleError::NoCandidates);
    }
    if candidates.len() < k {
        log::warn!("only {} candidates for {k} ensemble slots", candidates.len());
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(rank_order);
    sorted.truncate(k);
    Ok(sorted)
}

/// Lag-0 matrix on the dates every member forecasts: inputs are the members'
/// forecasts of that month, the output is the realized target.
pub fn build_master_matrix(members: &[Candidate], target: &MonthlySeries) -> Result<TrainingMatrix> {
    let first = members.first().ok_or(EnsembleError::NoCandidates)?;
    let mut shared: BTreeSet<MonthKey> = first.test_months.iter().copied().collect();
    for m in &members[1..] {
        let months: BTreeSet<MonthKey> = m.test_months.iter().copied().collect();
        shared = shared.intersection(&months).copied().collect();
    }
    if shared.is_empty() {
        return Err(EnsembleError::DateMismatch);
    }
    let level = |month: MonthKey| target.get(month).ok_or(EnsembleError::MissingTarget(month));

    let n = shared.len();
    let mut parts = MatrixParts {
        origin: MatrixOrigin::Master,
        lag: 0,
        input_names: members.iter().map(Candidate::label).collect(),
        inputs: Vec::with_capacity(n),
        output: Vec::with_capacity(n),
        months_out: Vec::with_capacity(n),
        recipe: OutputRecipe::Raw,
        actual: Vec::with_capacity(n),
        history: Vec::with_capacity(n),
    };
    for month in shared {
        parts.inputs.push(
            members
                .iter()
                .map(|m| m.forecast_at(month).expect("month is shared"))
                .collect(),
        );
        let y = level(month)?;
        parts.output.push(y);
        parts.actual.push(y);
        parts.months_out.push(month);
        parts.history.push([level(month.offset(-3))?, level(month.offset(-2))?, level(month.offset(-1))?]);
    }
    Ok(TrainingMatrix::new(parts)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterFit {
    pub best: RankedModel,
    pub evaluation: Evaluation,
    pub test_months: Vec<MonthKey>,
    pub test_actual: Vec<f64>,
    pub test_previous: Vec<f64>,
}

/// Multi-restart training of the master with the base networks' settings.
pub fn train_master(matrix: &TrainingMatrix, cfg: &TrainConfig) -> Result<MasterFit> {
    let ranked = multi_restart_train(matrix, cfg, &OutOfSampleIsm)?;
    let best = ranked.into_iter().next().expect("at least one restart");
    let (_, test) = crate::neural::split(matrix, cfg)?;
    let evaluation = evaluate(&best.test_forecasts, &test)?;
    Ok(MasterFit {
        best,
        evaluation,
        test_months: test.months_out().to_vec(),
        test_actual: test.actual().to_vec(),
        test_previous: test.previous_actual(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub members: Vec<Candidate>,
    pub master: NetworkModel,
    pub master_report: EquityReport,
    pub master_ep: Option<EpResult>,
}

impl EnsembleRecord {
    pub fn new(members: Vec<Candidate>, fit: &MasterFit) -> Self {
        Self {
            members,
            master: fit.best.model.clone(),
            master_report: fit.evaluation.report.clone(),
            master_ep: fit.evaluation.ep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub value: f64,
    pub direction: Position,
}

/// Master forecast for the next month from the members' latest forecasts.
/// The direction compares the master's output with `last_actual`.
pub fn predict_next(record: &EnsembleRecord, member_forecasts: &[f64], last_actual: f64) -> Result<Forecast> {
    if member_forecasts.len() != record.members.len() {
        return Err(EnsembleError::DimensionMismatch {
            expected: record.members.len(),
            got: member_forecasts.len(),
        });
    }
    let value = record.master.forward(member_forecasts)?;
    Ok(Forecast {
        value,
        direction: Position::from_forecast(value, last_actual),
    })
}
