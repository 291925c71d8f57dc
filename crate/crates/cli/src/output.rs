use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use murel::{Error, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command result: canonical JSON plus a flat CSV view.
pub struct Output {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn new(json: impl Serialize, header: &[&str], rows: Vec<Vec<String>>) -> Result<Self> {
        Ok(Self { json: serde_json::to_value(json)?, header: header.iter().map(|h| h.to_string()).collect(), rows })
    }

    /// Two-column `quantity,value` view of the top-level scalar fields.
    pub fn scalars(json: impl Serialize) -> Result<Self> {
        let json = serde_json::to_value(json)?;
        let rows = flatten("", &json);
        Ok(Self { json, header: vec!["quantity".into(), "value".into()], rows })
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, &self.json)?;
                buf.push(b'\n');
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
        }
        Ok(buf)
    }
}

/// Scalars of nested objects as dotted keys; arrays are skipped.
fn flatten(prefix: &str, v: &Value) -> Vec<Vec<String>> {
    match v {
        Value::Object(map) => map
            .iter()
            .flat_map(|(k, v)| {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v)
            })
            .collect(),
        Value::Array(_) => Vec::new(),
        Value::String(s) => vec![vec![prefix.to_string(), s.clone()]],
        other => vec![vec![prefix.to_string(), other.to_string()]],
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
