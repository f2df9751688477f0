//! CSV tables and `key = value` reports. Numbers are written as `{:.16e}`
//! (17 significant digits) so a rerun reproduces the files byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {reason}")]
    Write { path: PathBuf, reason: String },
    #[error("cannot read {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("{path}: missing column `{column}`")]
    Column { path: PathBuf, column: &'static str },
    #[error("{path}: row {row}: `{value}` is not a number")]
    Number { path: PathBuf, row: usize, value: String },
}

pub fn num(x: f64) -> String {
    // adding +0.0 turns -0.0 into 0.0
    format!("{:.16e}", x + 0.0)
}

/// `<prefix><suffix>`, e.g. `out/gold` + `_solution.csv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn ensure_parent(path: &Path) -> Result<(), OutputError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| OutputError::Write {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }),
        _ => Ok(()),
    }
}

/// A table with a header row; each record is a label column (optional)
/// followed by numbers.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| num(v)).collect());
    }

    pub fn push_labeled(&mut self, label: &str, values: &[f64]) {
        let mut row = vec![label.to_string()];
        row.extend(values.iter().map(|&v| num(v)));
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        ensure_parent(path)?;
        let err = |e: &dyn std::fmt::Display| OutputError::Write {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| err(&e))?;
        w.write_record(&self.header).map_err(|e| err(&e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| err(&e))?;
        }
        w.flush().map_err(|e| err(&e))
    }
}

/// Numeric columns read by header name.
pub struct Columns {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Columns {
    pub fn read(path: &Path) -> Result<Self, OutputError> {
        let err = |e: csv::Error| OutputError::Read {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        let mut r = csv::Reader::from_path(path).map_err(err)?;
        let header = r.headers().map_err(err)?.iter().map(|h| h.trim().to_string()).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        Ok(Columns {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    pub fn get(&self, column: &'static str) -> Result<Vec<f64>, OutputError> {
        let j = self.header.iter().position(|h| h == column).ok_or(OutputError::Column {
            path: self.path.clone(),
            column,
        })?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let cell = row.get(j).map(|s| s.trim()).unwrap_or("");
                cell.parse().map_err(|_| OutputError::Number {
                    path: self.path.clone(),
                    row: i + 1,
                    value: cell.to_string(),
                })
            })
            .collect()
    }
}

/// Plain-text report, one `key = value` per line.
#[derive(Default)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key} = {value}");
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.line(key, num(value));
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        ensure_parent(path)?;
        std::fs::write(path, &self.text).map_err(|e| OutputError::Write {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}
