use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::smoothing::denormalize_output;
use super::{PreprocessError, Result};
use crate::series::MonthKey;

/// Which configuration a matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrigin {
    BaseSet(u8),
    Master,
}

impl MatrixOrigin {
    pub fn base_set_id(self) -> Option<u8> {
        match self {
            MatrixOrigin::BaseSet(id) => Some(id),
            MatrixOrigin::Master => None,
        }
    }
}

impl fmt::Display for MatrixOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixOrigin::BaseSet(id) => write!(f, "bs{id:02}"),
            MatrixOrigin::Master => f.write_str("master"),
        }
    }
}

/// How the training target is derived from the raw target series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputRecipe {
    Raw,
    NormalizedDifference,
}

/// Lagged inputs paired with a target, plus the raw target context needed to
/// turn a network output back into a level forecast and to score it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMatrix {
    origin: MatrixOrigin,
    lag: u32,
    input_names: Vec<String>,
    inputs: Vec<Vec<f64>>,
    output: Vec<f64>,
    months_out: Vec<MonthKey>,
    recipe: OutputRecipe,
    actual: Vec<f64>,
    history: Vec<[f64; 3]>,
}

/// Builder argument for [`TrainingMatrix::new`].
#[derive(Debug, Clone)]
pub struct MatrixParts {
    pub origin: MatrixOrigin,
    pub lag: u32,
    pub input_names: Vec<String>,
    /// Row-major inputs, one row per output date.
    pub inputs: Vec<Vec<f64>>,
    pub output: Vec<f64>,
    pub months_out: Vec<MonthKey>,
    pub recipe: OutputRecipe,
    /// Raw target at each output date.
    pub actual: Vec<f64>,
    /// Raw target at the three preceding months, oldest first.
    pub history: Vec<[f64; 3]>,
}

impl TrainingMatrix {
    pub fn new(parts: MatrixParts) -> Result<Self> {
        let n = parts.output.len();
        let bad = |what: &str| Err(PreprocessError::MalformedMatrix(what.to_string()));
        if parts.inputs.len() != n
            || parts.months_out.len() != n
            || parts.actual.len() != n
            || parts.history.len() != n
        {
            return bad("column lengths differ");
        }
        let width = parts.input_names.len();
        if parts.inputs.iter().any(|r| r.len() != width) {
            return bad("row width differs from input names");
        }
        if parts.months_out.windows(2).any(|w| w[1] <= w[0]) {
            return bad("output months not strictly increasing");
        }
        let finite = parts.inputs.iter().flatten().all(|v| v.is_finite())
            && parts.output.iter().all(|v| v.is_finite())
            && parts.actual.iter().all(|v| v.is_finite());
        if !finite {
            return bad("non-finite entry");
        }
        Ok(Self {
            origin: parts.origin,
            lag: parts.lag,
            input_names: parts.input_names,
            inputs: parts.inputs,
            output: parts.output,
            months_out: parts.months_out,
            recipe: parts.recipe,
            actual: parts.actual,
            history: parts.history,
        })
    }

    pub fn origin(&self) -> MatrixOrigin {
        self.origin
    }

    pub fn lag(&self) -> u32 {
        self.lag
    }

    pub fn recipe(&self) -> OutputRecipe {
        self.recipe
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn width(&self) -> usize {
        self.input_names.len()
    }

    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn months_out(&self) -> &[MonthKey] {
        &self.months_out
    }

    /// Date of the input row paired with output row `row`.
    pub fn month_in(&self, row: usize) -> MonthKey {
        self.months_out[row].offset(-(self.lag as i32))
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn history(&self) -> &[[f64; 3]] {
        &self.history
    }

    /// Raw target one month before each output date.
    pub fn previous_actual(&self) -> Vec<f64> {
        self.history.iter().map(|h| h[2]).collect()
    }

    /// Convert a network output for `row` into a raw-unit level forecast.
    pub fn to_level(&self, row: usize, network_output: f64) -> Result<f64> {
        match self.recipe {
            OutputRecipe::Raw => Ok(network_output),
            OutputRecipe::NormalizedDifference => {
                denormalize_output(network_output, &self.history[row])
            }
        }
    }

    pub fn to_levels(&self, network_outputs: &[f64]) -> Result<Vec<f64>> {
        network_outputs
            .iter()
            .enumerate()
            .map(|(i, &v)| self.to_level(i, v))
            .collect()
    }

    /// Chronological split: rows `..at` and `at..`.
    pub fn split_at(&self, at: usize) -> (TrainingMatrix, TrainingMatrix) {
        let at = at.min(self.len());
        let part = |r: std::ops::Range<usize>| TrainingMatrix {
            origin: self.origin,
            lag: self.lag,
            input_names: self.input_names.clone(),
            inputs: self.inputs[r.clone()].to_vec(),
            output: self.output[r.clone()].to_vec(),
            months_out: self.months_out[r.clone()].to_vec(),
            recipe: self.recipe,
            actual: self.actual[r.clone()].to_vec(),
            history: self.history[r].to_vec(),
        };
        (part(0..at), part(at..self.len()))
    }

    /// Keep only the most recent `max_rows` rows.
    pub fn keep_latest(mut self, max_rows: usize) -> Self {
        if self.len() > max_rows {
            let drop = self.len() - max_rows;
            self.inputs.drain(..drop);
            self.output.drain(..drop);
            self.months_out.drain(..drop);
            self.actual.drain(..drop);
            self.history.drain(..drop);
        }
        self
    }

    /// Short identifier such as `bs02_lag07`.
    pub fn label(&self) -> String {
        format!("{}_lag{:02}", self.origin, self.lag)
    }

    /// CSV with `month_in, month_out, <inputs...>, output, actual`.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["month_in".to_string(), "month_out".to_string()];
        header.extend(self.input_names.iter().cloned());
        header.push("output".into());
        header.push("actual".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.month_in(i).to_string(), self.months_out[i].to_string()];
            rec.extend(self.inputs[i].iter().map(|v| v.to_string()));
            rec.push(self.output[i].to_string());
            rec.push(self.actual[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()
    }
}
