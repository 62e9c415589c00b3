use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::credence::ProbeRecord;

/// A probe that failed at the backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub formula: String,
    pub lexicon_name: String,
    pub backend_id: String,
    pub error: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One line of `probes.jsonl`. Error rows are told apart by their `error` key.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProbeRow {
    Record(ProbeRecord),
    Error(ErrorRow),
}

impl ProbeRow {
    /// Idempotence key: (formula, lexicon, backend).
    pub fn key(&self) -> (&str, &str, &str) {
        match self {
            ProbeRow::Record(r) => (&r.formula, &r.lexicon_name, &r.backend_id),
            ProbeRow::Error(e) => (&e.formula, &e.lexicon_name, &e.backend_id),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, ProbeRow::Error(_))
    }
}

/// Reads every row; a missing file reads as empty.
pub fn read_rows(path: &Path) -> Result<Vec<ProbeRow>, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let parse_err = |n: usize, e: serde_json::Error| CliError::Parse {
        path: path.to_path_buf(),
        message: format!("line {n}: {e}"),
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| parse_err(i + 1, e))?;
        let row = if v.get("error").is_some() {
            ProbeRow::Error(serde_json::from_value(v).map_err(|e| parse_err(i + 1, e))?)
        } else {
            ProbeRow::Record(serde_json::from_value(v).map_err(|e| parse_err(i + 1, e))?)
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_rows(path: &Path, rows: &[ProbeRow]) -> Result<(), CliError> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).expect("rows serialize");
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = serde_json::to_vec_pretty(value).expect("artifact serializes");
    out.push(b'\n');
    write_atomic(path, &out)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
