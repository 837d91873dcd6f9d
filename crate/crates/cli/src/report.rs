//! Versioned JSON reports and small file helpers.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::{CliError, EXIT_OTHER};

pub const REPORT_VERSION: u32 = 1;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError {
        code: EXIT_OTHER,
        message: format!("{}: {e}", path.display()),
    }
}

/// Writes `body`'s fields under a `schema` / `schema_version` /
/// `config_hash` header.
pub fn write(path: &Path, kind: &str, config_hash: &str, body: impl Serialize) -> Result<(), CliError> {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(format!("loadband.{kind}")));
    doc.insert("schema_version".into(), json!(REPORT_VERSION));
    doc.insert("config_hash".into(), json!(config_hash));
    match serde_json::to_value(body).map_err(|e| io_err(path, e))? {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("data".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| io_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Reads a report written by [`write`], checking its kind and version.
pub fn read(path: &Path, kind: &str, command: &str) -> Result<Value, CliError> {
    if !path.exists() {
        return Err(CliError::missing(path, command));
    }
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    let expected = format!("loadband.{kind}");
    if v.get("schema").and_then(Value::as_str) != Some(expected.as_str()) || v.get("schema_version").and_then(Value::as_u64) != Some(REPORT_VERSION.into()) {
        return Err(io_err(path, format!("not a {expected} v{REPORT_VERSION} report")));
    }
    Ok(v)
}

pub fn file_hash(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
}

pub fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    std::fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| io_err(path, e))
}
