use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{io_cause, Cause, Manifest, PipelineConfig, Prepared};
use crate::ensemble::Candidate;
use crate::neural::{read_model, write_model, NetworkModel};
use crate::series::AlignedFrame;

type Result<T> = std::result::Result<T, Cause>;

pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";
const CANDIDATES_FILE: &str = "candidates.json";
const SELECTION_FILE: &str = "selection.json";

/// One pipeline run's output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDir {
    path: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(|e| io_cause(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_cause(path, e))
}

impl RunDir {
    /// New directory `<output_dir>/<UTC timestamp>-<hash>`, suffixed if taken.
    pub fn create(output_dir: &Path, config_hash: &str) -> Result<Self> {
        fs::create_dir_all(output_dir).map_err(|e| io_cause(output_dir, e))?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
        let base = format!("{stamp}-{config_hash}");
        let mut path = output_dir.join(&base);
        let mut k = 1;
        loop {
            match fs::create_dir(&path) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    k += 1;
                    path = output_dir.join(format!("{base}-{k}"));
                }
                Err(e) => return Err(io_cause(&path, e)),
            }
        }
        for sub in ["models", "matrices", "reports"] {
            let p = path.join(sub);
            fs::create_dir(&p).map_err(|e| io_cause(&p, e))?;
        }
        Ok(Self { path })
    }

    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        if !path.is_dir() {
            return Err(io_cause(&path, "run directory not found"));
        }
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.path.join(rel)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("serializable");
        write_atomic(&self.join(name), text.as_bytes())
    }

    fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let path = self.join(name);
        let text = fs::read_to_string(&path).map_err(|e| io_cause(&path, e))?;
        serde_json::from_str(&text).map_err(|e| io_cause(&path, e))
    }

    pub fn write_config(&self, cfg: &PipelineConfig) -> Result<()> {
        write_atomic(&self.join(CONFIG_FILE), cfg.to_toml().as_bytes())
    }

    pub fn read_config(&self) -> Result<PipelineConfig> {
        let path = self.join(CONFIG_FILE);
        let text = fs::read_to_string(&path).map_err(|e| io_cause(&path, e))?;
        PipelineConfig::from_toml(&text).map_err(|e| e.cause)
    }

    pub fn write_frame(&self, frame: &AlignedFrame) -> Result<()> {
        let path = self.join("frame.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_cause(&path, e))?;
        let names: Vec<&str> = frame.column_names().collect();
        let mut header = vec!["date"];
        header.extend(&names);
        w.write_record(&header).map_err(|e| io_cause(&path, e))?;
        let cols: Vec<&[f64]> = names.iter().map(|n| frame.column(n).expect("listed column")).collect();
        for (row, month) in frame.months().enumerate() {
            let mut rec = vec![month.to_string()];
            rec.extend(cols.iter().map(|c| c[row].to_string()));
            w.write_record(&rec).map_err(|e| io_cause(&path, e))?;
        }
        w.flush().map_err(|e| io_cause(&path, e))
    }

    pub fn write_prepared(&self, prepared: &Prepared) -> Result<()> {
        self.write_frame(&prepared.frame)?;
        for m in &prepared.matrices {
            let path = self.join(format!("matrices/{}.csv", m.label()));
            let file = fs::File::create(&path).map_err(|e| io_cause(&path, e))?;
            m.write_csv(file).map_err(|e| io_cause(&path, e))?;
        }
        Ok(())
    }

    /// Relative path of a model file.
    pub fn model_path(label: &str) -> String {
        format!("models/{label}.model")
    }

    pub fn write_model(&self, label: &str, model: &NetworkModel) -> Result<String> {
        let rel = Self::model_path(label);
        write_atomic(&self.join(&rel), write_model(model).as_bytes())?;
        Ok(rel)
    }

    pub fn read_model(&self, rel: &str) -> Result<NetworkModel> {
        let path = self.join(rel);
        let text = fs::read_to_string(&path).map_err(|e| io_cause(&path, e))?;
        read_model(&text).map_err(|e| io_cause(&path, e))
    }

    pub fn write_candidates(&self, candidates: &[Candidate]) -> Result<()> {
        for c in candidates {
            self.write_model(&c.label(), &c.model)?;
        }
        self.write_json(CANDIDATES_FILE, &candidates)
    }

    pub fn read_candidates(&self) -> Result<Vec<Candidate>> {
        self.read_json(CANDIDATES_FILE)
    }

    pub fn write_selection(&self, members: &[Candidate]) -> Result<()> {
        let labels: Vec<String> = members.iter().map(Candidate::label).collect();
        self.write_json(SELECTION_FILE, &labels)
    }

    /// Selected members, looked up among the stored candidates.
    pub fn read_selection(&self) -> Result<Vec<Candidate>> {
        let labels: Vec<String> = self.read_json(SELECTION_FILE)?;
        let candidates = self.read_candidates()?;
        labels
            .iter()
            .map(|l| {
                candidates
                    .iter()
                    .find(|c| &c.label() == l)
                    .cloned()
                    .ok_or_else(|| Cause::IncompleteManifest(format!("selected {l} has no candidate")))
            })
            .collect()
    }

    pub fn write_master(&self, model: &NetworkModel) -> Result<String> {
        self.write_model("master", model)
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        self.write_json(MANIFEST_FILE, manifest)
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        self.read_json(MANIFEST_FILE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colliding_names_get_suffixes() {
        let dir = tempfile::tempdir().unwrap();
        let a = RunDir::create(dir.path(), "abc").unwrap();
        let b = RunDir::create(dir.path(), "abc").unwrap();
        assert_ne!(a.path(), b.path());
        assert!(b.join("models").is_dir());
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("x.json");
        write_atomic(&target, b"{}").unwrap();
        assert_eq!(fs::read_to_string(&target).unwrap(), "{}");
        assert!(!dir.path().join("x.partial").exists());
    }
}
