//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sweep::Table;

/// CSV text with a header row and 17 significant digits per cell. Fails if
/// any cell is not finite.
pub fn render_csv(table: &Table) -> Result<Vec<u8>> {
    for (r, row) in table.rows.iter().enumerate() {
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::numerical(format!(
                "non-finite value in column `{}` at row {}",
                table.columns[c],
                r + 1
            )));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Key-rate columns report extractable key, so negative net rates become zero.
pub fn clamp_key_rates(table: &mut Table) {
    let idx: Vec<usize> = table
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.ends_with(":key_rate"))
        .map(|(i, _)| i)
        .collect();
    for row in &mut table.rows {
        for &i in &idx {
            row[i] = row[i].max(0.0);
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub timestamp: String,
    pub command: String,
    pub status: String,
    pub error: Option<String>,
    pub exit_code: i32,
    pub seed: u64,
    pub full_config: BTreeMap<String, String>,
    pub formula_modes: BTreeMap<String, String>,
    pub results: BTreeMap<String, f64>,
    pub flags: Vec<String>,
    pub outputs: Vec<OutputFile>,
}

/// Writes `bytes` to `dir/name` and returns its manifest entry.
pub fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputFile> {
    let path: PathBuf = dir.join(name);
    fs::write(&path, bytes)?;
    Ok(OutputFile {
        path: path.display().to_string(),
        sha256: sha256_hex(bytes),
    })
}

pub fn write_manifest(dir: &Path, stem: &str, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.manifest.json"));
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
