//! Versioned checkpoint files and append-only output files.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::extraction::{CategoryCounts, Pipeline};
use crate::gateway::BackendCursor;

pub const CHECKPOINT_VERSION: u32 = 1;
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const LATEST_CHECKPOINT: &str = "checkpoint.json";

/// Everything needed to continue a batch exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<S> {
    pub version: u32,
    pub pipeline: Pipeline,
    pub seed: u64,
    /// Work units processed (succeeded or failed), in index order.
    pub completed: usize,
    pub completed_ids: Vec<String>,
    /// Attribute-profile draws consumed. Draws are indexed, so this equals
    /// `completed` for the concise pipeline and 0 for MADS.
    pub profile_draws: usize,
    /// Scripted-backend call counters, when the backend has them.
    pub backend_cursor: Option<BackendCursor>,
    /// Partial output files (relative to the run directory) and their
    /// lengths in bytes at checkpoint time.
    pub partial_files: BTreeMap<String, u64>,
    pub category_counts: CategoryCounts,
    pub stats: S,
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to `path` through a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

impl<S: Serialize + DeserializeOwned> Checkpoint<S> {
    pub fn file_name(completed: usize) -> String {
        format!("checkpoint-{completed:06}.json")
    }

    /// Writes `checkpoints/checkpoint-NNNNNN.json` and refreshes
    /// `checkpoint.json`.
    pub fn save(&self, run_dir: &Path) -> Result<PathBuf, PipelineError> {
        let dir = run_dir.join(CHECKPOINT_DIR);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut bytes = serde_json::to_vec_pretty(self).expect("checkpoint serializes");
        bytes.push(b'\n');
        let path = dir.join(Self::file_name(self.completed));
        write_atomic(&path, &bytes)?;
        write_atomic(&run_dir.join(LATEST_CHECKPOINT), &bytes)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let probe: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Checkpoint(format!("{}: {e}", path.display())))?;
        let version = probe.get("version").and_then(|v| v.as_u64());
        if version != Some(u64::from(CHECKPOINT_VERSION)) {
            return Err(PipelineError::Checkpoint(format!(
                "{}: unsupported checkpoint version {version:?}",
                path.display()
            )));
        }
        serde_json::from_value(probe)
            .map_err(|e| PipelineError::Checkpoint(format!("{}: {e}", path.display())))
    }

    /// The latest checkpoint of `run_dir`, if any.
    pub fn latest(run_dir: &Path) -> Result<Option<Self>, PipelineError> {
        let path = run_dir.join(LATEST_CHECKPOINT);
        if path.is_file() {
            Self::load(&path).map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Append-only JSONL outputs of one run directory.
#[derive(Debug)]
pub struct OutputFiles {
    run_dir: PathBuf,
    names: Vec<&'static str>,
}

impl OutputFiles {
    /// Creates (or empties) every named file.
    pub fn create(run_dir: &Path, names: &[&'static str]) -> Result<Self, PipelineError> {
        fs::create_dir_all(run_dir).map_err(io_err(run_dir))?;
        for name in names {
            let path = run_dir.join(name);
            File::create(&path).map_err(io_err(&path))?;
        }
        Ok(Self {
            run_dir: run_dir.to_path_buf(),
            names: names.to_vec(),
        })
    }

    /// Reopens files after a crash, cutting each back to its checkpointed
    /// length so that anything written after the checkpoint is discarded.
    pub fn restore(
        run_dir: &Path,
        names: &[&'static str],
        lengths: &BTreeMap<String, u64>,
    ) -> Result<Self, PipelineError> {
        for name in names {
            let path = run_dir.join(name);
            let len = lengths.get(*name).copied().unwrap_or(0);
            let f = OpenOptions::new()
                .create(true)
                .truncate(false)
                .write(true)
                .open(&path)
                .map_err(io_err(&path))?;
            let actual = f.metadata().map_err(io_err(&path))?.len();
            if actual < len {
                return Err(PipelineError::Checkpoint(format!(
                    "{} is shorter ({actual} bytes) than the checkpoint records ({len})",
                    path.display()
                )));
            }
            f.set_len(len).map_err(io_err(&path))?;
        }
        Ok(Self {
            run_dir: run_dir.to_path_buf(),
            names: names.to_vec(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.run_dir.join(name)
    }

    pub fn append_lines(&self, name: &str, lines: &[String]) -> Result<(), PipelineError> {
        if lines.is_empty() {
            return Ok(());
        }
        let path = self.path(name);
        let mut f = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let mut buf = String::new();
        for line in lines {
            buf.push_str(line);
            buf.push('\n');
        }
        f.write_all(buf.as_bytes()).map_err(io_err(&path))?;
        f.flush().map_err(io_err(&path))
    }

    pub fn lengths(&self) -> Result<BTreeMap<String, u64>, PipelineError> {
        self.names
            .iter()
            .map(|n| {
                let path = self.path(n);
                let len = fs::metadata(&path).map_err(io_err(&path))?.len();
                Ok((n.to_string(), len))
            })
            .collect()
    }
}
