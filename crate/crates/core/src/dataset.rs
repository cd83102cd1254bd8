//! Record-per-line dataset files and atomic output writes.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dom::{ElementRef, RefSet};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Html(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Observation markup, inline or in a file relative to the dataset file.
/// Exactly one of the two must be set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html_path: Option<String>,
}

impl HtmlSource {
    pub fn inline(html: impl Into<String>) -> Self {
        HtmlSource {
            html: Some(html.into()),
            html_path: None,
        }
    }

    pub fn load(&self, base_dir: &Path) -> Result<String, DatasetError> {
        match (&self.html, &self.html_path) {
            (Some(h), None) => Ok(h.clone()),
            (None, Some(p)) => {
                let path = base_dir.join(p);
                std::fs::read_to_string(&path).map_err(io_err(&path))
            }
            (Some(_), Some(_)) => Err(DatasetError::Html(
                "`html` and `html_path` are mutually exclusive".into(),
            )),
            (None, None) => Err(DatasetError::Html("record has neither `html` nor `html_path`".into())),
        }
    }
}

/// Input record for reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub instance_id: String,
    #[serde(flatten)]
    pub html: HtmlSource,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub action_history: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot_ref: Option<String>,
}

/// Input record for mining: an observation, its candidate units, and what
/// the oracle needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub instance_id: String,
    #[serde(default)]
    pub benchmark: String,
    #[serde(default)]
    pub source_model: String,
    #[serde(default)]
    pub goal: String,
    #[serde(default)]
    pub action_history: Vec<String>,
    #[serde(flatten)]
    pub html: HtmlSource,
    #[serde(default)]
    pub step_index: usize,
    pub refs: Vec<ElementRef>,
    /// Planted MFS for the simulation oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<RefSet>,
    /// Recorded wrong action for the proxy oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erroneous_action: Option<String>,
    /// Bid the agent acted on; its tree neighbors join the candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_target: Option<String>,
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| DatasetError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DatasetError> {
    write_atomic(path, to_jsonl(items).as_bytes())
}

/// Directory that relative `html_path` entries resolve against.
pub fn base_dir(dataset: &Path) -> PathBuf {
    dataset.parent().map(Path::to_path_buf).unwrap_or_default()
}
