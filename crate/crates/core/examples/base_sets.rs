// The ten base-set presets and the lagged matrices they produce on a
// synthetic frame.

use riskspread::preprocess::{assemble_base_sets, base_set_presets, derive_features, PreprocessConfig};
use riskspread::synthetic::{generate, SyntheticSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PreprocessConfig::default();
    let frame = derive_features(&generate(&SyntheticSpec::default()), &cfg)?;
    println!("feature frame {} to {}, {} columns", frame.start(), frame.end(), frame.column_names().count());

    let specs = base_set_presets(cfg.block_averages.len());
    for s in &specs {
        println!(
            "set {:>2}: {:?} output, lags {:?}, inputs {}",
            s.id,
            s.output,
            s.lags(&cfg),
            s.column_names().join(", ")
        );
    }
    let matrices = assemble_base_sets(&frame, &specs, &cfg)?;
    let m = &matrices[2];
    println!("{} matrices; {} has {} rows x {} inputs", matrices.len(), m.label(), m.len(), m.width());
    println!("first row pairs inputs of {} with output of {}", m.month_in(0), m.months_out()[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
