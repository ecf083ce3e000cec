//! CSV and JSON emission. Reals are written with 17 significant digits and
//! `.` as decimal separator so that files round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Accumulates a CSV file in memory; written in one go.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    /// A trailing marker row for runs aborted part-way.
    pub fn failure_marker(&mut self, message: &str) {
        let clean = message.replace([',', '\n'], ";");
        let _ = writeln!(self.text, "# FAILED: {clean}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, csv: &Csv) -> CliResult<PathBuf> {
    write_text(dir, name, csv.as_str())
}

pub fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serialises");
    text.push('\n');
    write_text(dir, name, &text)
}
