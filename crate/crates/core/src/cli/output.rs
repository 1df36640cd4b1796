//! Result rows and atomic CSV/JSON output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::error::{Error, Result};

/// Bumped whenever a column is added, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// One output row. Columns that do not apply to a subcommand stay empty
/// (CSV) or `null` (JSON); see `schema.md` for each column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub subcommand: String,
    /// `trial`, `summary` or `table`.
    pub row_kind: String,
    pub label: String,
    pub trial: Option<u64>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub rho: Option<f64>,
    pub symbol_rate: Option<u32>,
    pub alpha: Option<f64>,
    pub q: Option<u32>,
    pub snr_db: Option<f64>,
    pub trials: Option<usize>,
    pub success: Option<bool>,
    pub success_rate: Option<f64>,
    pub rate_bits: Option<f64>,
    pub achievable_rate: Option<f64>,
    pub capacity: Option<f64>,
    pub pe: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub max_error: Option<f64>,
    pub beta_hat: Option<f64>,
    pub op_count: Option<f64>,
    pub min_cut: Option<u64>,
    pub rank: Option<usize>,
    pub power_violations: Option<usize>,
    pub support_errors: Option<usize>,
    pub ml_errors: Option<usize>,
    pub exponent: Option<f64>,
    pub p_pattern_verbatim: Option<f64>,
    pub p_pattern_corrected: Option<f64>,
}

impl ResultRow {
    pub fn new(subcommand: &str, row_kind: &str, label: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            row_kind: row_kind.to_string(),
            label: label.into(),
            ..Default::default()
        }
    }
}

pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Parse(e.to_string()))
        }
        OutputFormat::Json => {
            let mut v = serde_json::to_vec_pretty(rows).map_err(|e| Error::Parse(e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
    }
}

pub fn parse_rows(bytes: &[u8], format: OutputFormat) -> Result<Vec<ResultRow>> {
    match format {
        OutputFormat::Csv => csv::Reader::from_reader(bytes)
            .deserialize()
            .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
            .collect(),
        OutputFormat::Json => serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string())),
    }
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file at `path`.
pub fn write_rows(path: &Path, rows: &[ResultRow], format: OutputFormat) -> Result<()> {
    let bytes = render(rows, format)?;
    let tmp = temp_path(path);
    let io = |e: std::io::Error| Error::Parse(format!("{}: {e}", path.display()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(".partial");
    path.with_file_name(name)
}
