use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Cause, PipelineError, Stage};
use crate::ensemble::DEFAULT_MEMBERS;
use crate::neural::TrainConfig;
use crate::preprocess::{base_set_presets, BaseSetSpec, PreprocessConfig};

/// One variable: a CSV file and the column holding it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    pub path: PathBuf,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub igaem: DataSource,
    pub target: DataSource,
    pub global: DataSource,
    pub tbill: DataSource,
}

impl DataConfig {
    /// Every source pointing at `path`, with the standard column names.
    pub fn single_file(path: impl Into<PathBuf>) -> Self {
        use crate::preprocess::columns;
        let path = path.into();
        let src = |c: &str| DataSource {
            path: path.clone(),
            column: c.to_string(),
        };
        Self {
            igaem: src(columns::IGAEM),
            target: src(columns::TARGET),
            global: src(columns::GLOBAL),
            tbill: src(columns::TBILL),
        }
    }

    pub fn sources(&self) -> [(&'static str, &DataSource); 4] {
        [
            ("igaem", &self.igaem),
            ("target", &self.target),
            ("global", &self.global),
            ("tbill", &self.tbill),
        ]
    }

    fn sources_mut(&mut self) -> [&mut DataSource; 4] {
        [&mut self.igaem, &mut self.target, &mut self.global, &mut self.tbill]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseSetSelection {
    /// Ids of the base sets to train, 1 to 10.
    pub enabled: Vec<u8>,
}

impl Default for BaseSetSelection {
    fn default() -> Self {
        Self {
            enabled: (1..=10).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub members: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            members: DEFAULT_MEMBERS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub formats: Vec<ReportFormat>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            formats: vec![ReportFormat::Csv, ReportFormat::Text],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub base_sets: BaseSetSelection,
    #[serde(default = "TrainConfig::desk")]
    pub train: TrainConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn config_error(message: impl Into<String>) -> PipelineError {
    PipelineError::new(Stage::Config, Cause::Config(message.into()))
}

impl PipelineConfig {
    pub fn new(data: DataConfig) -> Self {
        Self {
            data,
            output_dir: default_output_dir(),
            preprocess: PreprocessConfig::default(),
            base_sets: BaseSetSelection::default(),
            train: TrainConfig::desk(),
            ensemble: EnsembleConfig::default(),
            report: ReportConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Read a config file and resolve relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for src in self.data.sources_mut() {
            if src.path.is_relative() {
                src.path = base.join(&src.path);
            }
        }
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    /// Check every sub-config; does not touch the filesystem.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.preprocess
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        self.train.validate().map_err(|e| config_error(e.to_string()))?;
        let ids = &self.base_sets.enabled;
        if ids.is_empty() {
            return Err(config_error("no base sets enabled"));
        }
        let mut seen = [false; 11];
        for &id in ids {
            if !(1..=10).contains(&id) {
                return Err(config_error(format!("unknown base set {id}")));
            }
            if std::mem::replace(&mut seen[id as usize], true) {
                return Err(config_error(format!("base set {id} listed twice")));
            }
        }
        if self.ensemble.members == 0 {
            return Err(config_error("ensemble needs at least one member"));
        }
        if self.report.formats.is_empty() {
            return Err(config_error("no report formats"));
        }
        Ok(())
    }

    /// Enabled base-set specs in id order.
    pub fn base_set_specs(&self) -> Vec<BaseSetSpec> {
        base_set_presets(self.preprocess.block_averages.len())
            .into_iter()
            .filter(|s| self.base_sets.enabled.contains(&s.id))
            .collect()
    }

    /// First 12 hex digits of the SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}
