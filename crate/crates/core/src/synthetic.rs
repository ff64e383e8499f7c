//! Seeded synthetic datasets with a known lagged relationship, used by the
//! demo data, the examples and the end-to-end tests.
//!
//! The global spread and the T-bill rate follow noisy cycles with random
//! phases. The country spread is a fixed nonlinear function of both inputs
//! `lag` months earlier plus Gaussian noise whose standard deviation is
//! `noise` times the standard deviation of the noiseless signal. The
//! indicator is an independent geometric random walk.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::preprocess::{columns, RawInputs};
use crate::series::{MonthKey, MonthlySeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub start: MonthKey,
    pub months: usize,
    pub lag: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            start: MonthKey::new(1990, 1).expect("valid month"),
            months: 200,
            lag: 3,
            noise: 0.05,
            seed: 2024,
        }
    }
}

/// Noiseless country spread for given global spread and T-bill rate.
pub fn target_signal(global: f64, tbill: f64) -> f64 {
    let g = (global - 450.0) / 100.0;
    700.0 + 120.0 * g + 35.0 * g * g + 90.0 * (tbill - 3.5).tanh()
}

/// Generated source series, all on the same calendar.
pub fn generate(spec: &SyntheticSpec) -> RawInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let n = spec.months;
    let tau = std::f64::consts::TAU;
    let (p1, p2, p3): (f64, f64, f64) = (
        rng.random_range(0.0..tau),
        rng.random_range(0.0..tau),
        rng.random_range(0.0..tau),
    );

    let mut global = Vec::with_capacity(n);
    let mut tbill = Vec::with_capacity(n);
    let (mut eg, mut et) = (0.0, 0.0);
    for t in 0..n {
        let tf = t as f64;
        eg = 0.6 * eg + 8.0 * unit.sample(&mut rng);
        et = 0.6 * et + 0.08 * unit.sample(&mut rng);
        global.push(450.0 + 110.0 * (tau * tf / 23.0 + p1).sin() + 40.0 * (tau * tf / 9.0 + p3).sin() + eg);
        tbill.push(3.5 + 1.6 * (tau * tf / 37.0 + p2).sin() + et);
    }

    let signal: Vec<f64> = (0..n)
        .map(|t| {
            let s = t.saturating_sub(spec.lag);
            target_signal(global[s], tbill[s])
        })
        .collect();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let sd = (signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let target: Vec<f64> = signal
        .iter()
        .map(|v| (v + spec.noise * sd * unit.sample(&mut rng)).max(50.0))
        .collect();

    let mut igaem = Vec::with_capacity(n);
    let mut level: f64 = 100.0;
    for _ in 0..n {
        level *= (0.002 + 0.012 * unit.sample(&mut rng)).exp();
        igaem.push(level);
    }

    let series = |name: &str, values: Vec<f64>| {
        MonthlySeries::new(name, spec.start, values).expect("generated values are finite")
    };
    RawInputs {
        igaem: series(columns::IGAEM, igaem),
        target: series(columns::TARGET, target),
        global: series(columns::GLOBAL, global),
        tbill: series(columns::TBILL, tbill),
    }
}

/// Write the four series as one CSV: `date, igaem, embi_vzla, embi_global, tbill`.
pub fn write_csv<W: Write>(inputs: &RawInputs, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", columns::IGAEM, columns::TARGET, columns::GLOBAL, columns::TBILL])?;
    let all = [&inputs.igaem, &inputs.target, &inputs.global, &inputs.tbill];
    for (i, month) in inputs.target.months().enumerate() {
        let mut rec = vec![month.to_string()];
        rec.extend(all.iter().map(|s| format!("{:.6}", s.values()[i])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(inputs: &RawInputs, path: impl AsRef<Path>) -> csv::Result<()> {
    write_csv(inputs, std::fs::File::create(path)?)
}
