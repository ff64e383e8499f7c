use serde::{Deserialize, Serialize};

use super::{Cause, PipelineConfig, RunDir};
use crate::ensemble::{evaluate_levels, Candidate, Evaluation, MasterFit, Result as EnsembleResult};
use crate::metrics::Ism;
use crate::preprocess::OutputRecipe;
use crate::series::{AlignedFrame, MonthKey};

pub const MANIFEST_VERSION: u32 = 1;

/// Test-range predictions with the levels needed to rescore them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub months: Vec<MonthKey>,
    pub forecast: Vec<f64>,
    pub actual: Vec<f64>,
    /// Realized level one month before each date.
    pub previous: Vec<f64>,
}

impl TestRecord {
    pub fn evaluate(&self) -> EnsembleResult<Evaluation> {
        evaluate_levels(&self.forecast, &self.actual, &self.previous, &self.months)
    }

    fn is_consistent(&self) -> bool {
        let n = self.months.len();
        n > 0 && self.forecast.len() == n && self.actual.len() == n && self.previous.len() == n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub label: String,
    pub base_set_id: u8,
    pub lag: u32,
    pub recipe: OutputRecipe,
    pub seed: u64,
    pub epochs: usize,
    pub ism: Ism,
    pub norm_ep: Option<f64>,
    /// Relative to the run directory.
    pub model: String,
    pub test: TestRecord,
}

impl CandidateEntry {
    fn from_candidate(c: &Candidate) -> Self {
        Self {
            label: c.label(),
            base_set_id: c.base_set_id,
            lag: c.lag,
            recipe: c.recipe,
            seed: c.seed,
            epochs: c.epochs,
            ism: c.ism,
            norm_ep: c.norm_ep,
            model: RunDir::model_path(&c.label()),
            test: TestRecord {
                months: c.test_months.clone(),
                forecast: c.test_forecasts.clone(),
                actual: c.test_actual.clone(),
                previous: c.test_previous.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterEntry {
    pub seed: u64,
    pub epochs: usize,
    pub ism: Ism,
    pub norm_ep: Option<f64>,
    /// Member labels in input-column order.
    pub inputs: Vec<String>,
    pub model: String,
    pub test: TestRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub created_at: String,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub frame_start: MonthKey,
    pub frame_end: MonthKey,
    pub candidates: Vec<CandidateEntry>,
    /// Member labels, best first.
    pub members: Vec<String>,
    pub master: MasterEntry,
}

impl Manifest {
    pub fn build(
        cfg: &PipelineConfig,
        frame: &AlignedFrame,
        candidates: &[Candidate],
        members: &[Candidate],
        fit: &MasterFit,
    ) -> Self {
        let member_labels: Vec<String> = members.iter().map(Candidate::label).collect();
        Self {
            version: MANIFEST_VERSION,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config_hash: cfg.hash(),
            config: cfg.clone(),
            frame_start: frame.start(),
            frame_end: frame.end(),
            candidates: candidates.iter().map(CandidateEntry::from_candidate).collect(),
            members: member_labels.clone(),
            master: MasterEntry {
                seed: fit.best.seed,
                epochs: fit.best.epochs,
                ism: fit.evaluation.ism,
                norm_ep: fit.evaluation.norm_ep(),
                inputs: member_labels,
                model: RunDir::model_path("master"),
                test: TestRecord {
                    months: fit.test_months.clone(),
                    forecast: fit.best.test_forecasts.clone(),
                    actual: fit.test_actual.clone(),
                    previous: fit.test_previous.clone(),
                },
            },
        }
    }

    /// Equal in everything but the creation time.
    pub fn same_results(&self, other: &Manifest) -> bool {
        let strip = |m: &Manifest| Manifest {
            created_at: String::new(),
            ..m.clone()
        };
        strip(self) == strip(other)
    }

    pub fn candidate(&self, label: &str) -> Option<&CandidateEntry> {
        self.candidates.iter().find(|c| c.label == label)
    }

    /// Member entries in rank order.
    pub fn member_entries(&self) -> Result<Vec<&CandidateEntry>, Cause> {
        self.members
            .iter()
            .map(|l| {
                self.candidate(l)
                    .ok_or_else(|| Cause::IncompleteManifest(format!("member {l} not among candidates")))
            })
            .collect()
    }

    pub fn check_complete(&self) -> Result<(), Cause> {
        let incomplete = |m: String| Err(Cause::IncompleteManifest(m));
        if self.version != MANIFEST_VERSION {
            return incomplete(format!("unsupported version {}", self.version));
        }
        if self.candidates.is_empty() || self.members.is_empty() {
            return incomplete("no candidates or members".into());
        }
        self.member_entries()?;
        if self.master.inputs != self.members {
            return incomplete("master inputs differ from members".into());
        }
        if let Some(c) = self.candidates.iter().find(|c| !c.test.is_consistent()) {
            return incomplete(format!("test record of {} is inconsistent", c.label));
        }
        if !self.master.test.is_consistent() {
            return incomplete("master test record is inconsistent".into());
        }
        Ok(())
    }
}
