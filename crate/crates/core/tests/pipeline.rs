use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use riskspread::ensemble::{build_master_matrix, evaluate_levels, train_master, Candidate};
use riskspread::metrics::Ism;
use riskspread::neural::{Activation, NetworkModel, TrainConfig};
use riskspread::pipeline::{
    self, group_means, predict_stage, run_pipeline, Cause, DataConfig, PipelineConfig, RunDir, Stage,
};
use riskspread::preprocess::OutputRecipe;
use riskspread::series::{MonthKey, MonthlySeries};
use riskspread::synthetic::{generate, write_csv_file, SyntheticSpec};

fn small_config(dir: &Path) -> PipelineConfig {
    let csv = dir.join("data.csv");
    write_csv_file(&generate(&SyntheticSpec::default()), &csv).unwrap();
    let mut cfg = PipelineConfig::new(DataConfig::single_file(&csv));
    cfg.output_dir = dir.join("runs");
    cfg.base_sets.enabled = vec![1, 7, 9];
    cfg.preprocess.lags = vec![2, 3];
    cfg.train.restarts = 3;
    cfg.train.cycles = 150;
    cfg.ensemble.members = 4;
    cfg
}

#[test]
fn missing_data_halts_at_ingest() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.data.global.path = dir.path().join("absent.csv");
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Ingest);
    assert_eq!(err.exit_code(), 3);
    assert!(!cfg.output_dir.exists());
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let bin = env!("CARGO_BIN_EXE_riskspread");

    let good = dir.path().join("good.toml");
    std::fs::write(&good, cfg.to_toml()).unwrap();
    let st = Command::new(bin).args(["validate", "-c"]).arg(&good).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));

    let mut missing = cfg.clone();
    missing.data.tbill.path = dir.path().join("nope.csv");
    let path = dir.path().join("missing.toml");
    std::fs::write(&path, missing.to_toml()).unwrap();
    let st = Command::new(bin).args(["validate", "-c"]).arg(&path).output().unwrap().status;
    assert_eq!(st.code(), Some(3));

    let path = dir.path().join("bad.toml");
    std::fs::write(&path, format!("{}\n[extra]\nkey = 1\n", cfg.to_toml())).unwrap();
    let st = Command::new(bin).args(["validate", "-c"]).arg(&path).output().unwrap().status;
    assert_eq!(st.code(), Some(2));

    let st = Command::new(bin).args(["validate", "--base-sets", "11", "-c"]).arg(&good).output().unwrap().status;
    assert_eq!(st.code(), Some(2));

    let st = Command::new(bin).args(["report", "-r"]).arg(dir.path().join("no-run")).output().unwrap().status;
    assert_eq!(st.code(), Some(8));
}

#[test]
fn demo_config_round_trips() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/demo/demo.toml");
    let cfg = PipelineConfig::load(&path).unwrap();
    cfg.validate().unwrap();
    pipeline::validate(&cfg).unwrap();
    let again = PipelineConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.hash(), cfg.hash());
    assert!(cfg.data.target.path.is_absolute());
}

#[test]
fn staged_run_matches_one_shot_and_reports_recompute() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let one = run_pipeline(&cfg).unwrap();

    let run = pipeline::preprocess_stage(&cfg).unwrap();
    assert_ne!(run.path(), one.run.path());
    pipeline::train_stage(&run).unwrap();
    pipeline::select_stage(&run).unwrap();
    let staged = pipeline::master_stage(&run).unwrap();
    pipeline::report_stage(&run).unwrap();
    assert!(staged.same_results(&one.manifest));

    let m = &one.manifest;
    assert_eq!(m.members.len(), 4);
    assert_eq!(m.candidates.len(), 3 * 2);
    for c in &m.candidates {
        let e = c.test.evaluate().unwrap();
        assert_eq!(e.ism, c.ism);
        assert_eq!(e.norm_ep(), c.norm_ep);
    }

    let text = std::fs::read_to_string(one.run.join("reports/base_sets.csv")).unwrap();
    let scores: Vec<_> = m
        .candidates
        .iter()
        .map(|c| (c.base_set_id as u32, c.ism, c.norm_ep))
        .collect();
    let groups = group_means(&scores);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), groups.len());
    for (row, g) in rows.iter().zip(&groups) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], g.key.to_string());
        assert_eq!(f[1], g.networks.to_string());
        if let Some(v) = g.mean_ism {
            assert!((f[3].parse::<f64>().unwrap() - v).abs() < 1e-6);
        }
    }

    let curve = std::fs::read_to_string(one.run.join("reports/curves/master.csv")).unwrap();
    let last_eq: f64 = curve.lines().last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    let master = m.master.test.evaluate().unwrap();
    assert_eq!(last_eq, *master.report.eq.last().unwrap());
    assert_eq!(curve.lines().count() - 1, m.master.test.months.len());

    let summary = std::fs::read_to_string(one.run.join("reports/summary.txt")).unwrap();
    assert!(summary.contains(&format!("master: ISM {}", m.master.ism)));
}

#[test]
fn predict_and_stale_models() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let out = run_pipeline(&cfg).unwrap();
    let p = predict_stage(&out.run, None).unwrap();
    assert_eq!(p.month, out.manifest.frame_end.offset(1));
    assert_eq!(p.member_forecasts.len(), out.manifest.members.len());
    assert!(p.value.is_finite());

    let full = std::fs::read_to_string(&cfg.data.target.path).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    let short = dir.path().join("short.csv");
    std::fs::write(&short, lines[..lines.len() - 2].join("\n")).unwrap();
    let err = predict_stage(&out.run, Some(&DataConfig::single_file(&short))).unwrap_err();
    assert_eq!(err.stage, Stage::Predict);
    assert_eq!(err.exit_code(), 9);
    match err.cause {
        Cause::StaleModel { trained_through, data_end, .. } => {
            assert_eq!(trained_through, out.manifest.frame_end);
            assert_eq!(data_end, out.manifest.frame_end.offset(-2));
        }
        other => panic!("expected a stale model, got {other}"),
    }

    let reopened = RunDir::open(out.run.path()).unwrap();
    assert_eq!(predict_stage(&reopened, None).unwrap(), p);
}

#[test]
fn incomplete_run_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let run = pipeline::preprocess_stage(&cfg).unwrap();
    let err = pipeline::master_stage(&run).unwrap_err();
    assert_eq!(err.stage, Stage::Master);
    let err = pipeline::report_stage(&run).unwrap_err();
    assert_eq!(err.exit_code(), 8);
}

fn member(id: u8, months: &[MonthKey], forecasts: Vec<f64>, actual: &[f64], previous: &[f64]) -> Candidate {
    let e = evaluate_levels(&forecasts, actual, previous, months).unwrap();
    Candidate {
        base_set_id: id,
        lag: 1,
        recipe: OutputRecipe::Raw,
        seed: 0,
        epochs: 0,
        model: NetworkModel::zeros(vec![1, 1], Activation::Tanh, Activation::Identity),
        ism: e.ism,
        norm_ep: e.norm_ep(),
        test_months: months.to_vec(),
        test_forecasts: forecasts,
        test_actual: actual.to_vec(),
        test_previous: previous.to_vec(),
    }
}

#[test]
fn master_keeps_up_with_its_best_member() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 60;
    let start = MonthKey::new(2000, 1).unwrap();
    let mut levels = vec![700.0];
    for _ in 0..n + 3 {
        let next = levels.last().unwrap() * (1.0 + rng.random_range(-0.06..0.06));
        levels.push(next);
    }
    let target = MonthlySeries::new("embi_vzla", start, levels.clone()).unwrap();
    let months: Vec<MonthKey> = (4..4 + n).map(|i| start.offset(i as i32)).collect();
    let actual: Vec<f64> = (4..4 + n).map(|i| levels[i]).collect();
    let previous: Vec<f64> = (4..4 + n).map(|i| levels[i - 1]).collect();

    let oracle: Vec<f64> = actual.iter().map(|a| a * (1.0 + rng.random_range(-0.01..0.01))).collect();
    let mut members = vec![member(1, &months, oracle, &actual, &previous)];
    for id in 2..=5 {
        let noise: Vec<f64> = previous.iter().map(|p| p * (1.0 + rng.random_range(-0.05..0.05))).collect();
        members.push(member(id, &months, noise, &actual, &previous));
    }

    let matrix = build_master_matrix(&members, &target).unwrap();
    let cfg = TrainConfig {
        restarts: 20,
        stop_error: 0.005,
        cycles: 3000,
        ..TrainConfig::desk()
    };
    let fit = train_master(&matrix, &cfg).unwrap();
    let k = months.len() - fit.test_months.len();
    let best = &members[0];
    let best_on_test = evaluate_levels(
        &best.test_forecasts[k..],
        &fit.test_actual,
        &fit.test_previous,
        &fit.test_months,
    )
    .unwrap();
    match (fit.evaluation.ism, best_on_test.ism) {
        (Ism::PerfectStrategy, _) => {}
        (Ism::Finite(_), Ism::PerfectStrategy) => panic!("master lost perfection of its best input"),
        (Ism::Finite(m), Ism::Finite(b)) => assert!(m >= b - 0.1 * b.abs(), "master {m} vs member {b}"),
    }
}
