//! `y,x1,...,xd` CSV files: UTF-8, LF line endings, no quoting.

use std::fs;
use std::path::Path;

use drauc_core::{Dataset, Label};

use crate::error::{Error, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: label {value:?} is not 0 or 1")]
    BadLabel { line: usize, value: String },
    #[error("line {line}, column {column}: {value:?} is not a finite number")]
    NotNumeric { line: usize, column: usize, value: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("no data rows")]
    Empty,
}

/// Parsed but not yet normalized contents.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<Label>,
}

pub fn parse(text: &str) -> std::result::Result<RawTable, CsvError> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(CsvError::Empty)?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 2 || fields[0] != "y" {
        return Err(CsvError::MalformedHeader {
            line: 1,
            reason: "expected y,x1,...,xd".into(),
        });
    }
    for (k, f) in fields[1..].iter().enumerate() {
        if *f != format!("x{}", k + 1) {
            return Err(CsvError::MalformedHeader {
                line: 1,
                reason: format!("column {} should be x{}, found {f:?}", k + 2, k + 1),
            });
        }
    }
    let dim = fields.len() - 1;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line, row) in lines {
        if row.is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != dim + 1 {
            return Err(CsvError::Ragged {
                line,
                expected: dim + 1,
                found: cells.len(),
            });
        }
        let y = match cells[0] {
            "0" => Label::Negative,
            "1" => Label::Positive,
            other => {
                return Err(CsvError::BadLabel {
                    line,
                    value: other.to_string(),
                })
            }
        };
        for (k, cell) in cells[1..].iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => {
                    return Err(CsvError::NotNumeric {
                        line,
                        column: k + 2,
                        value: cell.to_string(),
                    })
                }
            }
        }
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(RawTable { dim, features, labels })
}

pub fn render(ds: &Dataset) -> String {
    let mut out = String::from("y");
    for k in 1..=ds.dim() {
        out.push_str(&format!(",x{k}"));
    }
    out.push('\n');
    for i in 0..ds.len() {
        out.push_str(&ds.label(i).bit().to_string());
        for v in ds.row(i) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> Result<RawTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse(&text)?)
}

/// Loads and normalizes: columns already inside `[0, 1]` are kept, the others
/// are min-max scaled (constant columns become 0.5).
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let raw = read(path.as_ref())?;
    Ok(Dataset::ingest(raw.features, raw.labels, raw.dim)?)
}

/// Loads features through an existing scaler, e.g. the one stored with a model.
pub fn load_csv_with_scaler(path: impl AsRef<Path>, scaler: &[drauc_core::data::Scaler]) -> Result<Dataset> {
    let raw = read(path.as_ref())?;
    if raw.dim != scaler.len() {
        return Err(drauc_core::Error::DimensionMismatch {
            expected: scaler.len(),
            got: raw.dim,
        }
        .into());
    }
    Ok(Dataset::with_scaler(raw.features, raw.labels, scaler.to_vec())?)
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render(ds)).map_err(|e| Error::io(path, e))
}
