// Train a few base sets, keep the best networks and stack them under a
// master, then forecast the next month.

use riskspread::ensemble::{build_master_matrix, predict_next, select_best, train_master, Candidate, EnsembleRecord};
use riskspread::neural::{derive_seed, multi_restart_train, split, OutOfSampleIsm, TrainConfig};
use riskspread::preprocess::{assemble_base_sets, base_set_presets, columns, derive_features, PreprocessConfig};
use riskspread::synthetic::{generate, SyntheticSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let pcfg = PreprocessConfig {
        lags: vec![2, 3, 4],
        ..PreprocessConfig::default()
    };
    let frame = derive_features(&generate(&SyntheticSpec::default()), &pcfg)?;
    let specs: Vec<_> = base_set_presets(3).into_iter().filter(|s| [1, 7, 10].contains(&s.id)).collect();
    let matrices = assemble_base_sets(&frame, &specs, &pcfg)?;

    let cfg = TrainConfig {
        restarts: 4,
        cycles: 300,
        ..TrainConfig::default()
    };
    let mut candidates = Vec::new();
    for (k, m) in matrices.iter().enumerate() {
        let tc = cfg.with_seed(derive_seed(cfg.rng_seed, k as u64));
        let ranked = multi_restart_train(m, &tc, &OutOfSampleIsm)?;
        let (_, test) = split(m, &tc)?;
        candidates.push(Candidate::from_ranked(m, &test, &ranked[0])?);
    }
    let members = select_best(&candidates, 5)?;
    for m in &members {
        println!("member {} ISM {} normEP {:?}", m.label(), m.ism, m.norm_ep);
    }

    let target = frame.series(columns::TARGET)?;
    let master_matrix = build_master_matrix(&members, &target)?;
    let fit = train_master(&master_matrix, &cfg)?;
    println!(
        "master on {} months: ISM {} normEP {:?}",
        master_matrix.len(),
        fit.evaluation.ism,
        fit.evaluation.norm_ep()
    );

    let last = *fit.test_actual.last().unwrap();
    let latest: Vec<f64> = members.iter().map(|m| *m.test_forecasts.last().unwrap()).collect();
    let record = EnsembleRecord::new(members, &fit);
    let f = predict_next(&record, &latest, last)?;
    println!("stacked forecast {:.2} ({:?} against {last:.2})", f.value, f.direction);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
