//! Chronological splitting and the adaptive-step trainer.
//!
//! Each epoch is one online pass over the training rows in date order. If
//! the epoch raised the mean loss, its updates are discarded and the step
//! is halved; otherwise they are kept and the step returns to its initial
//! value. Accepted losses therefore never increase.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{Activation, Affine, NetworkModel, Sample};
use super::{NeuralError, Result, TrainConfig, MAX_TEST_FRACTION, MIN_SPLIT_ROWS};
use crate::preprocess::TrainingMatrix;

/// Number of training rows for a matrix of `rows` rows: `floor(split * rows)`,
/// raised if needed so the test range stays within 45% of the rows.
pub fn split_point(rows: usize, split: f64) -> usize {
    let wanted = (split * rows as f64 + 1e-9).floor() as usize;
    let min_train = ((1.0 - MAX_TEST_FRACTION) * rows as f64 - 1e-9).ceil() as usize;
    wanted.max(min_train).min(rows)
}

/// Earliest rows train, the rest test. No shuffling.
pub fn split(matrix: &TrainingMatrix, cfg: &TrainConfig) -> Result<(TrainingMatrix, TrainingMatrix)> {
    cfg.validate()?;
    if matrix.len() < MIN_SPLIT_ROWS {
        return Err(NeuralError::TooFewRows {
            rows: matrix.len(),
            min: MIN_SPLIT_ROWS,
        });
    }
    Ok(matrix.split_at(split_point(matrix.len(), cfg.split)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSchedule {
    pub cycles: usize,
    pub stop_error: f64,
    /// Initial (and restored) step size. Zero leaves the weights untouched.
    pub learning_rate: f64,
}

impl From<&TrainConfig> for FitSchedule {
    fn from(cfg: &TrainConfig) -> Self {
        Self {
            cycles: cfg.cycles,
            stop_error: cfg.stop_error,
            learning_rate: cfg.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub model: NetworkModel,
    pub epochs: usize,
    /// Mean loss of the weights held after each epoch.
    pub loss_history: Vec<f64>,
    /// Final mean absolute error divided by the target range.
    pub normalized_error: f64,
}

fn mean_loss(model: &NetworkModel, samples: &[Sample]) -> f64 {
    samples.iter().map(|s| model.sample_loss(s)).sum::<f64>() / samples.len() as f64
}

/// MAE over the target range; targets are min-max scaled to a range of 2.
fn normalized_error(model: &NetworkModel, samples: &[Sample], target_range: f64) -> f64 {
    let mae = samples
        .iter()
        .map(|s| (model.network_output(&s.input) - s.target).abs())
        .sum::<f64>()
        / samples.len() as f64;
    mae / target_range
}

/// Run the adaptive-step trainer on samples already in network space.
pub fn fit(model: NetworkModel, samples: &[Sample], schedule: &FitSchedule) -> Result<FitOutcome> {
    if samples.is_empty() {
        return Err(NeuralError::TooFewRows { rows: 0, min: 1 });
    }
    let width = model.input_width();
    if let Some(s) = samples.iter().find(|s| s.input.len() != width) {
        return Err(NeuralError::DimensionMismatch {
            expected: width,
            got: s.input.len(),
        });
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.target), hi.max(s.target))
    });
    let target_range = if hi > lo { hi - lo } else { 1.0 };

    let mut model = model;
    let mut loss = mean_loss(&model, samples);
    if !loss.is_finite() {
        return Err(NeuralError::DivergedTraining);
    }
    let mut rate = schedule.learning_rate;
    let mut history = Vec::with_capacity(schedule.cycles.min(1024));
    let mut epochs = 0;
    let mut grad = model.zero_gradient();
    let mut error = normalized_error(&model, samples, target_range);

    for _ in 0..schedule.cycles {
        epochs += 1;
        let mut candidate = model.clone();
        for s in samples {
            grad.iter_mut().for_each(|g| g.fill(0.0));
            candidate.accumulate_gradient(s, &mut grad);
            for (w, g) in candidate.weights.iter_mut().zip(&grad) {
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi -= rate * gi;
                }
            }
        }
        let candidate_loss = mean_loss(&candidate, samples);
        if !candidate_loss.is_finite() {
            return Err(NeuralError::DivergedTraining);
        }
        if candidate_loss <= loss {
            model = candidate;
            loss = candidate_loss;
            rate = schedule.learning_rate;
        } else {
            rate *= 0.5;
        }
        history.push(loss);
        error = normalized_error(&model, samples, target_range);
        if error < schedule.stop_error {
            break;
        }
    }
    Ok(FitOutcome {
        model,
        epochs,
        loss_history: history,
        normalized_error: error,
    })
}

/// Fit scaling on `data`, draw initial weights from `cfg.rng_seed` and train.
pub fn train(data: &TrainingMatrix, cfg: &TrainConfig) -> Result<FitOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(NeuralError::TooFewRows { rows: 0, min: 1 });
    }
    let first = data.output()[0];
    if data.output().iter().all(|&v| v == first) {
        return Err(NeuralError::ConstantOutput);
    }
    let width = data.width();
    let input_scaling: Vec<Affine> = (0..width)
        .map(|c| Affine::min_max(data.inputs().iter().map(|r| r[c])))
        .collect();
    let output_scaling = Affine::min_max(data.output().iter().copied());

    let sizes = cfg.layer_sizes(width);
    let mut model = NetworkModel::zeros(sizes, Activation::Tanh, Activation::Identity);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for w in model.weights.iter_mut().flatten() {
        *w = rng.random_range(-cfg.init_range..=cfg.init_range);
    }
    model.set_scaling(input_scaling, output_scaling);

    let samples: Vec<Sample> = data
        .inputs()
        .iter()
        .zip(data.output())
        .map(|(row, &y)| Sample {
            input: row
                .iter()
                .zip(&model.input_scaling)
                .map(|(v, a)| a.apply(*v))
                .collect(),
            target: output_scaling.apply(y),
        })
        .collect();
    fit(model, &samples, &FitSchedule::from(cfg))
}
