//! Deterministic artifact output: every file lands via temp-then-rename,
//! and JSON documents are read back and compared before the run counts the
//! write as done. Nothing here records wall time, so a rerun with the same
//! config and seed produces byte-identical files.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot serialize {path}: {source}")]
    Serialize {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("artifact {path} did not read back equal to the value written")]
    ReadBackMismatch { path: PathBuf },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to `path` atomically: the data goes to a temp file in the
/// same directory and is renamed into place, so readers never observe a
/// half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ArtifactError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(io_err(path))?;
    std::io::Write::write_all(&mut tmp, bytes).map_err(io_err(path))?;
    tmp.persist(path)
        .map_err(|e| io_err(path)(e.error))
        .map(|_| ())
}

/// Serializes `value` as pretty JSON, writes it atomically, then reads the
/// file back and deserializes it to confirm the document round-trips to an
/// equal value. A mismatch means the schema lost information and the run
/// must not report success.
pub fn write_json_checked<T>(path: &Path, value: &T) -> Result<(), ArtifactError>
where
    T: Serialize + DeserializeOwned + PartialEq,
{
    let mut text = serde_json::to_string_pretty(value).map_err(|source| {
        ArtifactError::Serialize {
            path: path.to_path_buf(),
            source,
        }
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    if bytes != text.as_bytes() {
        return Err(ArtifactError::ReadBackMismatch {
            path: path.to_path_buf(),
        });
    }
    let back: T = serde_json::from_slice(&bytes).map_err(|_| ArtifactError::ReadBackMismatch {
        path: path.to_path_buf(),
    })?;
    if &back != value {
        return Err(ArtifactError::ReadBackMismatch {
            path: path.to_path_buf(),
        });
    }
    Ok(())
}

/// Summary document one training run emits as `metrics.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub experiment: String,
    pub seed: u64,
    pub epochs_run: usize,
    /// Mean loss of the last completed epoch; absent when the run aborted
    /// before finishing its first epoch.
    pub final_loss: Option<f64>,
    pub converged: bool,
    /// Worst post-training unitarity defect over constrained layers; zero
    /// when no layer is constrained.
    pub unitarity_defect: f64,
    /// Mean relative output energy error on the held-out set, when one
    /// exists.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_energy_error: Option<f64>,
    /// Held-out classification accuracy, for labelled tasks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_accuracy: Option<f64>,
    /// Cause of an early numeric stop, if the run did not finish.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abort: Option<String>,
}
