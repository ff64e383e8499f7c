// Compound moving averages, centered block averages and the normalized
// month-over-month output with its exact inverse.

use riskspread::preprocess::{
    block_average_series, denormalize_output, double_smooth, ema_smooth, normalize_output,
    BlockAverageConfig, SmoothingConfig,
};
use riskspread::series::{MonthKey, MonthlySeries};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let levels: Vec<f64> = (0..24).map(|i| 500.0 + 60.0 * (i as f64 / 3.0).sin() + i as f64).collect();
    let cfg = SmoothingConfig::new(0.1)?;
    let once = ema_smooth(&levels, &cfg)?;
    let twice = double_smooth(&levels, &cfg)?;
    for t in [0, 6, 12, 23] {
        println!("t={t:>2} raw {:>7.2} ema {:>7.2} double {:>7.2}", levels[t], once[t], twice[t]);
    }

    let series = MonthlySeries::new("x", MonthKey::new(2000, 1).unwrap(), levels.clone())?;
    let ba = block_average_series(&series, &BlockAverageConfig::new(4, 2)?)?;
    println!("block average (M=4, n=2) starts {} with {:.2}", ba.start(), ba.values()[0]);

    let normalized = normalize_output(&levels)?;
    let t = 10;
    let recent = [levels[t], levels[t + 1], levels[t + 2]];
    let back = denormalize_output(normalized[t], &recent)?;
    println!("normalized {:.5} maps back to {back:.6} (actual {:.6})", normalized[t], levels[t + 3]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
