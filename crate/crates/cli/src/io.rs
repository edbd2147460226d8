//! CSV input and atomic output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};

/// A numeric CSV table with column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTable {
    pub labels: Vec<String>,
    /// Whether the labels came from a header row.
    pub has_header: bool,
    pub values: DMatrix<f64>,
}

impl LabeledTable {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

pub fn default_labels(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("V{j}")).collect()
}

/// Reads a numeric CSV. The first row is taken as a header of labels when
/// any of its cells is not a number; otherwise labels default to `V1..Vp`.
pub fn read_table(path: &Path) -> Result<LabeledTable> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);

    let mut labels: Option<Vec<String>> = None;
    let mut has_header = false;
    let mut data: Vec<f64> = Vec::new();
    let mut cols = 0usize;
    let mut rows = 0usize;

    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(index as u64 + 1);
        if index == 0 {
            cols = record.len();
            if record.iter().any(|cell| cell.parse::<f64>().is_err()) {
                labels = Some(record.iter().map(str::to_string).collect());
                has_header = true;
                continue;
            }
        }
        if record.len() != cols {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                row: line,
                col: record.len().min(cols) + 1,
                message: format!("expected {cols} fields, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value = cell.parse::<f64>().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                row: line,
                col: j + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    row: line,
                    col: j + 1,
                    message: format!("non-finite value: {cell:?}"),
                });
            }
            data.push(value);
        }
        rows += 1;
    }

    if rows == 0 || cols == 0 {
        return Err(CliError::Input(format!(
            "{}: no numeric rows",
            path.display()
        )));
    }
    Ok(LabeledTable {
        labels: labels.unwrap_or_else(|| default_labels(cols)),
        has_header,
        values: DMatrix::from_row_slice(rows, cols, &data),
    })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Formats a matrix entry with 17 significant digits so that reading it back
/// gives the same `f64`.
pub fn format_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a labeled matrix as CSV with a header row of labels.
pub fn write_matrix(path: &Path, labels: &[String], m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&csv_row(labels.iter().map(String::as_str)));
    for i in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols()).map(|j| format_exact(m[(i, j)])).collect();
        out.push_str(&csv_row(cells.iter().map(String::as_str)));
    }
    write_atomic(path, out.as_bytes())
}

/// One CSV line, quoting cells that need it.
pub fn csv_row<'a>(cells: impl IntoIterator<Item = &'a str>) -> String {
    let mut line = String::new();
    for (k, cell) in cells.into_iter().enumerate() {
        if k > 0 {
            line.push(',');
        }
        if cell.contains([',', '"', '\n', '\r']) {
            let _ = write!(line, "\"{}\"", cell.replace('"', "\"\""));
        } else {
            line.push_str(cell);
        }
    }
    line.push('\n');
    line
}

/// Shortest decimal form that parses back to the same value; `NaN` for NaN.
pub fn format_value(x: f64) -> String {
    format!("{x}")
}
