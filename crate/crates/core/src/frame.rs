//! Feature matrix with named columns, an aligned target vector, and the
//! timestamps each row came from. Frames are guaranteed free of sentinels
//! and non-finite values at construction.

use std::path::Path;

use chrono::NaiveDateTime;
use thiserror::Error;

use crate::ingest::is_sentinel;

pub const TIMESTAMP_FMT: &str = "%Y-%m-%dT%H:%M";

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite or sentinel value at row {row}, column `{col}`")]
    BadValue { row: usize, col: String },
    #[error("no such column `{0}`")]
    NoSuchColumn(String),
    #[error("csv: line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: Vec<String>,
    /// Row-major, `n_rows x n_features`.
    x: Vec<f64>,
    y: Vec<f64>,
    row_keys: Vec<NaiveDateTime>,
}

impl Frame {
    pub fn new(
        columns: Vec<String>,
        x: Vec<f64>,
        y: Vec<f64>,
        row_keys: Vec<NaiveDateTime>,
    ) -> Result<Frame, FrameError> {
        let p = columns.len();
        let n = y.len();
        if row_keys.len() != n {
            return Err(FrameError::Dimension(format!(
                "{} row keys for {} targets",
                row_keys.len(),
                n
            )));
        }
        if x.len() != n * p {
            return Err(FrameError::Dimension(format!(
                "matrix has {} entries, expected {}x{}",
                x.len(),
                n,
                p
            )));
        }
        for (i, v) in x.iter().enumerate() {
            if !v.is_finite() || is_sentinel(*v) {
                return Err(FrameError::BadValue {
                    row: i / p,
                    col: columns[i % p].clone(),
                });
            }
        }
        for (i, v) in y.iter().enumerate() {
            if !v.is_finite() || is_sentinel(*v) {
                return Err(FrameError::BadValue {
                    row: i,
                    col: "target".to_string(),
                });
            }
        }
        Ok(Frame {
            columns,
            x,
            y,
            row_keys,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row_keys(&self) -> &[NaiveDateTime] {
        &self.row_keys
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.x[i * p..(i + 1) * p]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }

    /// New frame with the given feature columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<Frame, FrameError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| FrameError::NoSuchColumn(n.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut x = Vec::with_capacity(self.n_rows() * idx.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            x.extend(idx.iter().map(|&j| row[j]));
        }
        Frame::new(names.to_vec(), x, self.y.clone(), self.row_keys.clone())
    }

    /// New frame keeping only the rows at `indices`, in that order.
    pub fn subset_rows(&self, indices: &[usize]) -> Frame {
        let p = self.n_features();
        let mut x = Vec::with_capacity(indices.len() * p);
        let mut y = Vec::with_capacity(indices.len());
        let mut keys = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
            keys.push(self.row_keys[i]);
        }
        Frame {
            columns: self.columns.clone(),
            x,
            y,
            row_keys: keys,
        }
    }

    /// CSV with a header of feature names, then `target`, then `timestamp`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.columns.join(","));
        if !self.columns.is_empty() {
            s.push(',');
        }
        s.push_str("target,timestamp\n");
        for i in 0..self.n_rows() {
            for v in self.row(i) {
                s.push_str(&format!("{v},"));
            }
            s.push_str(&format!(
                "{},{}\n",
                self.y[i],
                self.row_keys[i].format(TIMESTAMP_FMT)
            ));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), FrameError> {
        std::fs::write(path, self.to_csv()).map_err(|source| FrameError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Frame, FrameError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(FrameError::Csv {
            line: 1,
            msg: "empty file".to_string(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[cols.len() - 2] != "target" || cols[cols.len() - 1] != "timestamp"
        {
            return Err(FrameError::Csv {
                line: 1,
                msg: "header must end with `target,timestamp`".to_string(),
            });
        }
        let columns: Vec<String> = cols[..cols.len() - 2].iter().map(|s| s.to_string()).collect();
        let p = columns.len();
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut keys = Vec::new();
        for (idx, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let line = idx + 1;
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != p + 2 {
                return Err(FrameError::Csv {
                    line,
                    msg: format!("expected {} fields, found {}", p + 2, fields.len()),
                });
            }
            for f in &fields[..p] {
                x.push(f.parse().map_err(|_| FrameError::Csv {
                    line,
                    msg: format!("bad number `{f}`"),
                })?);
            }
            y.push(fields[p].parse().map_err(|_| FrameError::Csv {
                line,
                msg: format!("bad number `{}`", fields[p]),
            })?);
            keys.push(
                NaiveDateTime::parse_from_str(fields[p + 1], TIMESTAMP_FMT).map_err(|e| {
                    FrameError::Csv {
                        line,
                        msg: format!("bad timestamp `{}`: {e}", fields[p + 1]),
                    }
                })?,
            );
        }
        Frame::new(columns, x, y, keys)
    }

    pub fn read_csv(path: &Path) -> Result<Frame, FrameError> {
        let text = std::fs::read_to_string(path).map_err(|source| FrameError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Frame::from_csv_str(&text)
    }
}
