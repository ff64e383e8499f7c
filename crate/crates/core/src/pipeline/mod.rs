//! End-to-end orchestration: ingest, feature derivation, base-network
//! training, selection, stacking, reports and next-month prediction, all
//! driven by one [`PipelineConfig`] and recorded in a run directory.
//!
//! ```text
//! <output_dir>/<UTC timestamp>-<config hash>/
//!     config.toml          resolved config
//!     frame.csv            derived feature frame
//!     matrices/*.csv       training matrices
//!     candidates.json      best restart of every matrix
//!     selection.json       member labels, best first
//!     models/*.model       serialized networks
//!     manifest.json        written last
//!     reports/             plot-ready CSV and summary.txt
//! ```

mod config;
mod manifest;
mod predict;
mod report;
mod rundir;

pub use config::{
    BaseSetSelection, DataConfig, DataSource, EnsembleConfig, PipelineConfig, ReportConfig,
    ReportFormat,
};
pub use manifest::{CandidateEntry, Manifest, MasterEntry, TestRecord, MANIFEST_VERSION};
pub use predict::{predict, Prediction};
pub use report::{group_means, report, GroupMean};
pub use rundir::RunDir;

use std::fmt;

use thiserror::Error;

use crate::ensemble::{
    build_master_matrix, select_best, train_master, Candidate, EnsembleError, MasterFit,
};
use crate::metrics::MetricsError;
use crate::neural::{derive_seed, multi_restart_train, split, NeuralError, OutOfSampleIsm};
use crate::preprocess::{
    assemble_base_sets, columns, derive_features, PreprocessError, RawInputs, TrainingMatrix,
};
use crate::series::{load_series, AlignedFrame, ColumnSpec, MonthKey, SeriesError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Config,
    Ingest,
    Preprocess,
    Train,
    Select,
    Master,
    Report,
    Predict,
}

impl Stage {
    /// Process exit status for a failure in this stage.
    pub fn exit_code(self) -> u8 {
        match self {
            Stage::Config => 2,
            Stage::Ingest => 3,
            Stage::Preprocess => 4,
            Stage::Train => 5,
            Stage::Select => 6,
            Stage::Master => 7,
            Stage::Report => 8,
            Stage::Predict => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Train => "train",
            Stage::Select => "select",
            Stage::Master => "master",
            Stage::Report => "report",
            Stage::Predict => "predict",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum Cause {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("manifest incomplete: {0}")]
    IncompleteManifest(String),
    #[error("models were trained through {trained_through}, data needed for {needed} is missing (data ends {data_end})")]
    StaleModel {
        trained_through: MonthKey,
        needed: MonthKey,
        data_end: MonthKey,
    },
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {cause}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub cause: Cause,
}

impl PipelineError {
    pub fn new(stage: Stage, cause: Cause) -> Self {
        Self { stage, cause }
    }

    pub fn exit_code(&self) -> u8 {
        self.stage.exit_code()
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Attach a stage to any error convertible into a [`Cause`].
pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T, E: Into<Cause>> AtStage<T> for std::result::Result<T, E> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| PipelineError::new(stage, e.into()))
    }
}

pub(crate) fn io_cause(path: &std::path::Path, e: impl fmt::Display) -> Cause {
    Cause::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Seed stream of the master network.
const MASTER_STREAM: u64 = 0xffff;

/// Seed stream of one base matrix; stable when other sets are toggled.
pub fn matrix_stream(base_set_id: u8, lag: u32) -> u64 {
    base_set_id as u64 * 100 + lag as u64
}

/// Config invariants plus existence of every data file.
pub fn validate(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate()?;
    for (_, src) in cfg.data.sources() {
        if !src.path.is_file() {
            return Err(PipelineError::new(
                Stage::Ingest,
                SeriesError::MissingFile(src.path.display().to_string()).into(),
            ));
        }
    }
    Ok(())
}

pub fn ingest(cfg: &PipelineConfig) -> Result<RawInputs> {
    let load = |name: &str, src: &DataSource| -> Result<_> {
        let mut s = load_series(&src.path, &[ColumnSpec::new(name, &src.column)]).at(Stage::Ingest)?;
        Ok(s.remove(0))
    };
    Ok(RawInputs {
        igaem: load(columns::IGAEM, &cfg.data.igaem)?,
        target: load(columns::TARGET, &cfg.data.target)?,
        global: load(columns::GLOBAL, &cfg.data.global)?,
        tbill: load(columns::TBILL, &cfg.data.tbill)?,
    })
}

/// Derived frame and every enabled training matrix.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub frame: AlignedFrame,
    pub matrices: Vec<TrainingMatrix>,
}

pub fn prepare(cfg: &PipelineConfig, raw: &RawInputs) -> Result<Prepared> {
    let frame = derive_features(raw, &cfg.preprocess).at(Stage::Preprocess)?;
    let matrices = assemble_base_sets(&frame, &cfg.base_set_specs(), &cfg.preprocess).at(Stage::Preprocess)?;
    Ok(Prepared { frame, matrices })
}

/// Best restart of each matrix, in matrix order.
pub fn train_candidates(cfg: &PipelineConfig, matrices: &[TrainingMatrix]) -> Result<Vec<Candidate>> {
    matrices
        .iter()
        .map(|m| {
            let base = m.origin().base_set_id().unwrap_or(0);
            let tc = cfg.train.with_seed(derive_seed(cfg.train.rng_seed, matrix_stream(base, m.lag())));
            let ranked = multi_restart_train(m, &tc, &OutOfSampleIsm).at(Stage::Train)?;
            let (_, test) = split(m, &tc).at(Stage::Train)?;
            let c = Candidate::from_ranked(m, &test, &ranked[0]).at(Stage::Train)?;
            log::info!("{}: ISM {} after {} epochs", c.label(), c.ism, c.epochs);
            Ok(c)
        })
        .collect()
}

pub fn select(cfg: &PipelineConfig, candidates: &[Candidate]) -> Result<Vec<Candidate>> {
    select_best(candidates, cfg.ensemble.members).at(Stage::Select)
}

pub fn fit_master(cfg: &PipelineConfig, members: &[Candidate], frame: &AlignedFrame) -> Result<MasterFit> {
    let target = frame.series(columns::TARGET).at(Stage::Master)?;
    let matrix = build_master_matrix(members, &target).at(Stage::Master)?;
    let tc = cfg.train.with_seed(derive_seed(cfg.train.rng_seed, MASTER_STREAM));
    train_master(&matrix, &tc).at(Stage::Master)
}

/// Ingest and derive features for a new run; writes the frame, matrices
/// and resolved config into a fresh run directory.
pub fn preprocess_stage(cfg: &PipelineConfig) -> Result<RunDir> {
    validate(cfg)?;
    let raw = ingest(cfg)?;
    let prepared = prepare(cfg, &raw)?;
    let run = RunDir::create(&cfg.output_dir, &cfg.hash()).at(Stage::Preprocess)?;
    run.write_config(cfg).at(Stage::Preprocess)?;
    run.write_prepared(&prepared).at(Stage::Preprocess)?;
    Ok(run)
}

fn reload(run: &RunDir, stage: Stage) -> Result<(PipelineConfig, Prepared)> {
    let cfg = run.read_config().at(stage)?;
    let raw = ingest(&cfg).map_err(|e| PipelineError::new(stage, e.cause))?;
    let prepared = prepare(&cfg, &raw).map_err(|e| PipelineError::new(stage, e.cause))?;
    Ok((cfg, prepared))
}

/// Train every matrix of a preprocessed run.
pub fn train_stage(run: &RunDir) -> Result<Vec<Candidate>> {
    let (cfg, prepared) = reload(run, Stage::Train)?;
    let candidates = train_candidates(&cfg, &prepared.matrices)?;
    run.write_candidates(&candidates).at(Stage::Train)?;
    Ok(candidates)
}

pub fn select_stage(run: &RunDir) -> Result<Vec<Candidate>> {
    let cfg = run.read_config().at(Stage::Select)?;
    let candidates = run.read_candidates().at(Stage::Select)?;
    let members = select(&cfg, &candidates)?;
    run.write_selection(&members).at(Stage::Select)?;
    Ok(members)
}

/// Train the master and write the manifest.
pub fn master_stage(run: &RunDir) -> Result<Manifest> {
    let (cfg, prepared) = reload(run, Stage::Master)?;
    let candidates = run.read_candidates().at(Stage::Master)?;
    let members = run.read_selection().at(Stage::Master)?;
    let fit = fit_master(&cfg, &members, &prepared.frame)?;
    run.write_master(&fit.best.model).at(Stage::Master)?;
    let manifest = Manifest::build(&cfg, &prepared.frame, &candidates, &members, &fit);
    run.write_manifest(&manifest).at(Stage::Master)?;
    Ok(manifest)
}

pub fn report_stage(run: &RunDir) -> Result<Vec<std::path::PathBuf>> {
    let manifest = run.read_manifest().at(Stage::Report)?;
    report(&manifest, run)
}

/// Forecast the next month with a finished run, from `data` or, if absent,
/// from the run's configured sources.
pub fn predict_stage(run: &RunDir, data: Option<&DataConfig>) -> Result<Prediction> {
    let manifest = run.read_manifest().at(Stage::Predict)?;
    let mut cfg = manifest.config.clone();
    if let Some(d) = data {
        cfg.data = d.clone();
    }
    let raw = ingest(&cfg).map_err(|e| PipelineError::new(Stage::Predict, e.cause))?;
    predict(&manifest, run, &raw)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run: RunDir,
    pub manifest: Manifest,
}

/// Every stage in order; returns the run directory and its manifest.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutcome> {
    let run = preprocess_stage(cfg)?;
    train_stage(&run)?;
    select_stage(&run)?;
    let manifest = master_stage(&run)?;
    report(&manifest, &run)?;
    Ok(RunOutcome { run, manifest })
}
