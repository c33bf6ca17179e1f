//! Plot-ready CSV output: `#`-prefixed metadata lines, a header row, then
//! numeric rows. Byte output is deterministic for fixed inputs: LF line
//! endings, `.` decimal separator, 17 significant digits (which round-trips
//! `f64` exactly).

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl GridOutput {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn meta_num(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, format_number(value));
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits; exact `f64` round-trip.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one output file, creating parent directories as needed.
pub fn write_grid(output: &GridOutput, path: &Path) -> Result<PathBuf, CliError> {
    let io_err = |source: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(output.to_csv_string().as_bytes())
        .map_err(io_err)?;
    Ok(path.to_path_buf())
}

/// Reads a file written by [`write_grid`] back into memory.
pub fn read_grid(path: &Path) -> Result<GridOutput, CliError> {
    let io_err = |source: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    let mut metadata = Vec::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once('=') {
                metadata.push((k.to_string(), v.to_string()));
            }
        } else if columns.is_empty() {
            columns = line.split(',').map(|c| c.to_string()).collect();
        } else if !line.is_empty() {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>().unwrap_or(f64::NAN))
                .collect();
            rows.push(row);
        }
    }
    Ok(GridOutput {
        metadata,
        columns,
        rows,
    })
}
