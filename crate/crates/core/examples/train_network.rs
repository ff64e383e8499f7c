// Multi-restart training of one lagged matrix, ranked by the test-range
// Modified Sharpe Index, and a model file round trip.

use riskspread::neural::{multi_restart_train, read_model, write_model, OutOfSampleIsm, TrainConfig};
use riskspread::preprocess::{base_set_presets, build_lagged_matrix, derive_features, PreprocessConfig};
use riskspread::synthetic::{generate, SyntheticSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let pcfg = PreprocessConfig::default();
    let frame = derive_features(&generate(&SyntheticSpec::default()), &pcfg)?;
    let spec = &base_set_presets(3)[6];
    let matrix = build_lagged_matrix(&frame, spec, 3, &pcfg)?;

    let cfg = TrainConfig {
        restarts: 8,
        ..TrainConfig::default()
    };
    let ranked = multi_restart_train(&matrix, &cfg, &OutOfSampleIsm)?;
    for r in &ranked {
        println!("restart {:>2} seed {:016x}: {:>4} epochs, ISM {}", r.restart, r.seed, r.epochs, r.score);
    }

    let best = &ranked[0];
    let text = write_model(&best.model);
    assert_eq!(read_model(&text)?, best.model);
    println!("model file: {} lines, {} weights", text.lines().count(), best.model.parameter_count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
