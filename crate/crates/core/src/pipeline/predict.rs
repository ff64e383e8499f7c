use serde::Serialize;

use super::{AtStage, Cause, CandidateEntry, Manifest, Result, RunDir, Stage};
use crate::ensemble::{predict_next, Candidate, EnsembleRecord};
use crate::metrics::Position;
use crate::neural::NetworkModel;
use crate::preprocess::{columns, denormalize_output, derive_features, OutputRecipe, RawInputs};
use crate::series::MonthKey;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// Month being forecast, one past the end of the data.
    pub month: MonthKey,
    pub value: f64,
    pub direction: Position,
    pub last_actual: f64,
    /// `(label, level forecast)` per member, in rank order.
    pub member_forecasts: Vec<(String, f64)>,
    pub members_long: usize,
}

impl CandidateEntry {
    fn to_candidate(&self, model: NetworkModel) -> Candidate {
        Candidate {
            base_set_id: self.base_set_id,
            lag: self.lag,
            recipe: self.recipe,
            seed: self.seed,
            epochs: self.epochs,
            model,
            ism: self.ism,
            norm_ep: self.norm_ep,
            test_months: self.test.months.clone(),
            test_forecasts: self.test.forecast.clone(),
            test_actual: self.test.actual.clone(),
            test_previous: self.test.previous.clone(),
        }
    }
}

/// Load the ensemble of a finished run and forecast the month after the
/// last month of `raw`.
pub fn predict(manifest: &Manifest, run: &RunDir, raw: &RawInputs) -> Result<Prediction> {
    manifest.check_complete().at(Stage::Predict)?;
    let cfg = &manifest.config;
    let frame = derive_features(raw, &cfg.preprocess).at(Stage::Predict)?;
    let data_end = frame.end();
    let stale = |needed: MonthKey| {
        Cause::StaleModel {
            trained_through: manifest.frame_end,
            needed,
            data_end,
        }
    };
    if data_end < manifest.frame_end {
        return Err(stale(manifest.frame_end)).at(Stage::Predict);
    }
    let target = frame.column(columns::TARGET).at(Stage::Predict)?;
    let n = target.len();
    let recent = [target[n - 3], target[n - 2], target[n - 1]];
    let month = data_end.offset(1);

    let specs = cfg.base_set_specs();
    let entries = manifest.member_entries().at(Stage::Predict)?;
    let mut members = Vec::with_capacity(entries.len());
    let mut member_forecasts = Vec::with_capacity(entries.len());
    for e in entries {
        let spec = specs
            .iter()
            .find(|s| s.id == e.base_set_id)
            .ok_or_else(|| Cause::IncompleteManifest(format!("base set {} not enabled", e.base_set_id)))
            .at(Stage::Predict)?;
        let input_month = month.offset(-(e.lag as i32));
        let row = spec
            .input_row(&frame, input_month)
            .map_err(|_| stale(input_month))
            .at(Stage::Predict)?;
        let model = run.read_model(&e.model).at(Stage::Predict)?;
        let out = model.forward(&row).at(Stage::Predict)?;
        let level = match e.recipe {
            OutputRecipe::Raw => out,
            OutputRecipe::NormalizedDifference => denormalize_output(out, &recent).at(Stage::Predict)?,
        };
        member_forecasts.push((e.label.clone(), level));
        members.push(e.to_candidate(model));
    }

    let master_eval = manifest.master.test.evaluate().at(Stage::Predict)?;
    let record = EnsembleRecord {
        members,
        master: run.read_model(&manifest.master.model).at(Stage::Predict)?,
        master_report: master_eval.report,
        master_ep: master_eval.ep,
    };
    let inputs: Vec<f64> = member_forecasts.iter().map(|(_, v)| *v).collect();
    let last_actual = recent[2];
    let f = predict_next(&record, &inputs, last_actual).at(Stage::Predict)?;
    let members_long = inputs
        .iter()
        .filter(|v| Position::from_forecast(**v, last_actual) == Position::Long)
        .count();
    Ok(Prediction {
        month,
        value: f.value,
        direction: f.direction,
        last_actual,
        member_forecasts,
        members_long,
    })
}
