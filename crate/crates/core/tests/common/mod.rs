//! Reference implementations used to cross-check the library. Each one is
//! written the slow, obvious way and shares no code with the crate.
#![allow(dead_code)]

use rand::Rng;
use riskspread::neural::{Activation, NetworkModel};

/// Sort the window, pick the k-th smallest, flip the sign.
/// `tail_pct` is the tail size in whole percent (5 for 95% confidence).
pub fn brute_force_var(window: &[f64], tail_pct: usize) -> f64 {
    let mut sorted = window.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = (window.len() * tail_pct / 100).max(1);
    -sorted[k - 1]
}

/// Solve the 2x2 normal equations of `y = a + b x` by Cramer's rule.
pub fn normal_equation_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let a = (sy * sxx - sx * sxy) / det;
    let b = (n * sxy - sx * sy) / det;
    (a, b)
}

/// Slope of the amplified curve `c_i * (1 + 10 i / n)` against `i = 1..n`.
pub fn amplified_slope(curve: &[f64]) -> f64 {
    let n = curve.len();
    let x: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let y: Vec<f64> = curve
        .iter()
        .zip(&x)
        .map(|(c, i)| c * (1.0 + 10.0 * i / n as f64))
        .collect();
    normal_equation_line(&x, &y).1
}

pub struct StepCurves {
    pub eq: Vec<f64>,
    pub pe: Vec<f64>,
    pub losses: Vec<f64>,
}

/// Walk the dates one by one: go long when the forecast is at or above the
/// previous actual, book the signed log return in percent.
pub fn step_curves(predicted: &[f64], actual: &[f64], previous: &[f64]) -> StepCurves {
    let mut out = StepCurves {
        eq: Vec::new(),
        pe: Vec::new(),
        losses: Vec::new(),
    };
    let (mut eq, mut pe) = (0.0, 0.0);
    for i in 0..predicted.len() {
        let r = (actual[i] / previous[i]).ln();
        let signed = if predicted[i] >= previous[i] { r } else { -r };
        eq += 100.0 * signed;
        pe += 100.0 * r.abs();
        if signed < 0.0 {
            out.losses.push(r.abs());
        }
        out.eq.push(eq);
        out.pe.push(pe);
    }
    out
}

/// `None` for a strategy without losing months.
pub fn ism_oracle(predicted: &[f64], actual: &[f64], previous: &[f64]) -> Option<f64> {
    let c = step_curves(predicted, actual, previous);
    if c.losses.is_empty() {
        return None;
    }
    let vol = c.losses.iter().sum::<f64>() / c.losses.len() as f64;
    Some(amplified_slope(&c.eq) / amplified_slope(&c.pe) / vol)
}

fn activate(act: Activation, z: f64) -> f64 {
    match act {
        Activation::Tanh => 1.0 - 2.0 / ((2.0 * z).exp() + 1.0),
        Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        Activation::Identity => z,
    }
}

/// Forward pass through the public accessors, one neuron at a time.
pub fn forward_oracle(model: &NetworkModel, raw: &[f64]) -> f64 {
    let scaled: Vec<f64> = raw
        .iter()
        .zip(model.input_scaling())
        .map(|(v, a)| v * a.scale + a.shift)
        .collect();
    let sizes = model.layer_sizes();
    let layers = model.weights().len();
    let mut a = scaled;
    for l in 0..layers {
        let w = &model.weights()[l];
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let mut next = vec![0.0; n_out];
        for j in 0..n_out {
            let mut z = w[j * (n_in + 1) + n_in];
            for i in 0..n_in {
                z += w[j * (n_in + 1) + i] * a[i];
            }
            let act = if l + 1 == layers {
                model.output_activation()
            } else {
                model.hidden_activation()
            };
            next[j] = activate(act, z);
        }
        a = next;
    }
    let out = model.output_scaling();
    (a[0] - out.shift) / out.scale
}

/// Levels whose log returns are `returns`, starting at `base`.
pub fn levels_from_returns(base: f64, returns: &[f64]) -> Vec<f64> {
    let mut x = vec![base];
    for r in returns {
        x.push(x.last().unwrap() * r.exp());
    }
    x
}

/// Random positive forecast/actual/previous triples of length `n`.
pub fn random_triples<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut previous = Vec::with_capacity(n);
    let mut actual = Vec::with_capacity(n);
    let mut predicted = Vec::with_capacity(n);
    let mut level = rng.random_range(300.0..1500.0);
    for _ in 0..n {
        previous.push(level);
        level *= 1.0 + rng.random_range(-0.08..0.08);
        actual.push(level);
        predicted.push(previous.last().unwrap() * (1.0 + rng.random_range(-0.08..0.08)));
    }
    (predicted, actual, previous)
}
