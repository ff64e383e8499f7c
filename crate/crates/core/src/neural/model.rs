use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{NeuralError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Logistic,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation value `a = f(z)`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "tanh" => Some(Activation::Tanh),
            "logistic" => Some(Activation::Logistic),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// `scaled = raw * scale + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub scale: f64,
    pub shift: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        scale: 1.0,
        shift: 0.0,
    };

    /// Map `[min, max]` of `values` onto `[-1, 1]`; constant data maps to 0.
    pub fn min_max(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            let c = if lo.is_finite() { lo } else { 0.0 };
            return Affine {
                scale: 1.0,
                shift: -c,
            };
        }
        let scale = 2.0 / (hi - lo);
        Affine {
            scale,
            shift: -1.0 - lo * scale,
        }
    }

    pub fn apply(&self, raw: f64) -> f64 {
        raw * self.scale + self.shift
    }

    pub fn invert(&self, scaled: f64) -> f64 {
        (scaled - self.shift) / self.scale
    }

    pub fn is_invertible(&self) -> bool {
        self.scale != 0.0 && self.scale.is_finite() && self.shift.is_finite()
    }
}

/// Input vector already mapped through a specific model's input scaling.
///
/// Only [`NetworkModel::scale_input`] produces one, and its values cannot be
/// fed back into scaling, so inputs are scaled exactly once:
///
/// ```compile_fail
/// # use riskspread::neural::{NetworkModel, Activation};
/// # let model = NetworkModel::zeros(vec![2, 1], Activation::Identity, Activation::Identity);
/// let once = model.scale_input(&[1.0, 2.0]).unwrap();
/// let twice = model.scale_input(&once).unwrap();
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledInput {
    values: Vec<f64>,
    fingerprint: u64,
}

/// One training example in network (scaled) space.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub(crate) layer_sizes: Vec<usize>,
    /// Per layer, row-major `[out][in + 1]` with the bias in the last column.
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) hidden: Activation,
    pub(crate) output: Activation,
    pub(crate) input_scaling: Vec<Affine>,
    pub(crate) output_scaling: Affine,
}

impl NetworkModel {
    pub fn new(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        hidden: Activation,
        output: Activation,
        input_scaling: Vec<Affine>,
        output_scaling: Affine,
    ) -> Result<Self> {
        let model = Self {
            layer_sizes,
            weights,
            hidden,
            output,
            input_scaling,
            output_scaling,
        };
        model.validate()?;
        Ok(model)
    }

    /// All-zero weights with identity scaling.
    pub fn zeros(layer_sizes: Vec<usize>, hidden: Activation, output: Activation) -> Self {
        let weights = layer_sizes
            .windows(2)
            .map(|w| vec![0.0; w[1] * (w[0] + 1)])
            .collect();
        let inputs = layer_sizes.first().copied().unwrap_or(0);
        Self {
            layer_sizes,
            weights,
            hidden,
            output,
            input_scaling: vec![Affine::IDENTITY; inputs],
            output_scaling: Affine::IDENTITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NeuralError::MalformedModel(m.to_string()));
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return bad("need at least input and output layers of positive size");
        }
        if *self.layer_sizes.last().unwrap() != 1 {
            return bad("output layer must have one unit");
        }
        if self.weights.len() != self.layer_sizes.len() - 1 {
            return bad("weight matrix count does not match layers");
        }
        for (w, sizes) in self.weights.iter().zip(self.layer_sizes.windows(2)) {
            if w.len() != sizes[1] * (sizes[0] + 1) {
                return bad("weight matrix shape does not match layer sizes");
            }
        }
        if self.weights.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite weight");
        }
        if self.input_scaling.len() != self.layer_sizes[0] {
            return bad("input scaling width does not match input layer");
        }
        if !self.input_scaling.iter().all(Affine::is_invertible)
            || !self.output_scaling.is_invertible()
        {
            return bad("scaling map not invertible");
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn input_scaling(&self) -> &[Affine] {
        &self.input_scaling
    }

    pub fn output_scaling(&self) -> Affine {
        self.output_scaling
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    pub(crate) fn set_scaling(&mut self, inputs: Vec<Affine>, output: Affine) {
        self.input_scaling = inputs;
        self.output_scaling = output;
    }

    fn scaling_fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for a in &self.input_scaling {
            a.scale.to_bits().hash(&mut h);
            a.shift.to_bits().hash(&mut h);
        }
        h.finish()
    }

    pub fn scale_input(&self, raw: &[f64]) -> Result<ScaledInput> {
        self.check_width(raw.len())?;
        Ok(ScaledInput {
            values: raw
                .iter()
                .zip(&self.input_scaling)
                .map(|(v, a)| a.apply(*v))
                .collect(),
            fingerprint: self.scaling_fingerprint(),
        })
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.input_width() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.input_width(),
                got,
            });
        }
        Ok(())
    }

    /// Prediction in raw target units.
    pub fn forward(&self, raw: &[f64]) -> Result<f64> {
        self.forward_scaled(&self.scale_input(raw)?)
    }

    pub fn forward_scaled(&self, input: &ScaledInput) -> Result<f64> {
        if input.fingerprint != self.scaling_fingerprint() {
            return Err(NeuralError::ForeignScaling);
        }
        Ok(self.output_scaling.invert(self.network_output(&input.values)))
    }

    /// Output of the layers alone, in scaled target space.
    pub fn network_output(&self, scaled: &[f64]) -> f64 {
        let mut a = scaled.to_vec();
        let last = self.weights.len() - 1;
        for (l, w) in self.weights.iter().enumerate() {
            let act = if l == last { self.output } else { self.hidden };
            a = dense(w, &a, self.layer_sizes[l + 1], act);
        }
        a[0]
    }

    /// Half squared error of one sample; accumulates its weight gradient
    /// into `grad` (same shape as the weights).
    pub(crate) fn accumulate_gradient(&self, sample: &Sample, grad: &mut [Vec<f64>]) -> f64 {
        let last = self.weights.len() - 1;
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        activations.push(sample.input.clone());
        for (l, w) in self.weights.iter().enumerate() {
            let act = if l == last { self.output } else { self.hidden };
            let next = dense(w, &activations[l], self.layer_sizes[l + 1], act);
            activations.push(next);
        }
        let out = activations[last + 1][0];
        let err = out - sample.target;
        let mut delta = vec![err * self.output.derivative_from_output(out)];
        for l in (0..=last).rev() {
            let n_in = self.layer_sizes[l];
            let stride = n_in + 1;
            let input = &activations[l];
            let w = &self.weights[l];
            let g = &mut grad[l];
            for (j, d) in delta.iter().enumerate() {
                let row = &mut g[j * stride..(j + 1) * stride];
                for i in 0..n_in {
                    row[i] += d * input[i];
                }
                row[n_in] += d;
            }
            if l > 0 {
                delta = (0..n_in)
                    .map(|i| {
                        let back: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(j, d)| w[j * stride + i] * d)
                            .sum();
                        back * self.hidden.derivative_from_output(input[i])
                    })
                    .collect();
            }
        }
        0.5 * err * err
    }

    pub(crate) fn sample_loss(&self, sample: &Sample) -> f64 {
        let e = self.network_output(&sample.input) - sample.target;
        0.5 * e * e
    }

    pub(crate) fn zero_gradient(&self) -> Vec<Vec<f64>> {
        self.weights.iter().map(|w| vec![0.0; w.len()]).collect()
    }
}

fn dense(w: &[f64], input: &[f64], n_out: usize, act: Activation) -> Vec<f64> {
    let stride = input.len() + 1;
    (0..n_out)
        .map(|j| {
            let row = &w[j * stride..(j + 1) * stride];
            let z = row[..input.len()]
                .iter()
                .zip(input)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + row[input.len()];
            act.apply(z)
        })
        .collect()
}

/// Largest relative gap between backpropagated gradients and central finite
/// differences of the sample loss, over every weight.
pub fn gradient_check(model: &NetworkModel, sample: &Sample, epsilon: f64) -> f64 {
    let mut analytic = model.zero_gradient();
    model.accumulate_gradient(sample, &mut analytic);
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for l in 0..probe.weights.len() {
        for k in 0..probe.weights[l].len() {
            let orig = probe.weights[l][k];
            probe.weights[l][k] = orig + epsilon;
            let up = probe.sample_loss(sample);
            probe.weights[l][k] = orig - epsilon;
            let down = probe.sample_loss(sample);
            probe.weights[l][k] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            let a = analytic[l][k];
            let gap = (a - numeric).abs();
            if gap > 0.0 {
                worst = worst.max(gap / a.abs().max(numeric.abs()).max(1e-8));
            }
        }
    }
    worst
}
