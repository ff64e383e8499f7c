// The full pipeline on synthetic data in a temporary directory: run
// directory, manifest, reports and a next-month prediction.

use riskspread::pipeline::{predict_stage, run_pipeline, DataConfig, PipelineConfig};
use riskspread::synthetic::{generate, write_csv_file, SyntheticSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("riskspread-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("data.csv");
    write_csv_file(&generate(&SyntheticSpec::default()), &csv)?;

    let mut cfg = PipelineConfig::new(DataConfig::single_file(&csv));
    cfg.output_dir = dir.join("runs");
    cfg.base_sets.enabled = vec![1, 7];
    cfg.preprocess.lags = vec![2, 3, 4];
    cfg.train.restarts = 3;
    cfg.train.cycles = 200;
    cfg.ensemble.members = 4;

    let out = run_pipeline(&cfg)?;
    println!("run directory {}", out.run.path().display());
    println!("{}", std::fs::read_to_string(out.run.join("reports/summary.txt"))?);

    let p = predict_stage(&out.run, None)?;
    println!("{}: {:.2} ({:?}), {} of {} members up", p.month, p.value, p.direction, p.members_long, p.member_forecasts.len());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
