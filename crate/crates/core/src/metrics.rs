//! Regression comparison metrics and the station/split/model report grid.
//!
//! The published comparison reports MAE, a "Variance" row read here as the
//! explained-variance score times 100, and an "Accuracy" row reconstructed
//! as `100 * (1 - MAE / mean(y))` — the closest simple formula consistent
//! with the published tables. Both reconstructions are documented choices,
//! not standardized definitions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::preprocess::{mean, population_std};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("target variance is zero")]
    ZeroVariance,
    #[error("target mean is zero")]
    ZeroMean,
}

fn check(y: &[f64], yhat: &[f64]) -> Result<(), MetricsError> {
    if y.len() != yhat.len() {
        return Err(MetricsError::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Mean squared error, `(1/N) * sum((y_i - yhat_i)^2)`.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    Ok(y.iter()
        .zip(yhat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y.len() as f64)
}

/// Mean absolute error, `(1/N) * sum(|y_i - yhat_i|)`.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Explained variance as a percentage: `100 * (1 - var(y - yhat) / var(y))`,
/// population variances throughout.
pub fn explained_variance_pct(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    let var_y = population_std(y).powi(2);
    if var_y == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    let resid: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| a - b).collect();
    let var_r = population_std(&resid).powi(2);
    Ok(100.0 * (1.0 - var_r / var_y))
}

/// Accuracy as a percentage: `100 * (1 - MAE / mean(y))`, clamped below at 0.
pub fn accuracy_pct(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    let mean_abs = y.iter().map(|v| v.abs()).sum::<f64>() / y.len() as f64;
    let mean_y = mean(y);
    if mean_abs == 0.0 || mean_y == 0.0 {
        return Err(MetricsError::ZeroMean);
    }
    let m = mae(y, yhat)?;
    Ok((100.0 * (1.0 - m / mean_y)).max(0.0))
}

/// All four comparison metrics for one (model, station, split) cell.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub mse: f64,
    pub variance_pct: f64,
    pub accuracy_pct: f64,
    pub n: usize,
}

pub fn metrics_report(y: &[f64], yhat: &[f64]) -> Result<MetricsReport, MetricsError> {
    Ok(MetricsReport {
        mae: mae(y, yhat)?,
        mse: mse(y, yhat)?,
        variance_pct: explained_variance_pct(y, yhat)?,
        accuracy_pct: accuracy_pct(y, yhat)?,
        n: y.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    TrainTest,
    Validation,
}

impl Split {
    pub fn label(&self) -> &'static str {
        match self {
            Split::TrainTest => "train-test",
            Split::Validation => "validation",
        }
    }
}

/// Metric grid keyed by (station, split, model). Cells that were never
/// produced stay absent and render as `NA`, never as silent zeros.
#[derive(Debug, Clone, Default)]
pub struct ComparisonTable {
    cells: BTreeMap<(String, Split, String), MetricsReport>,
    station_order: Vec<String>,
    model_order: Vec<String>,
}

impl ComparisonTable {
    pub fn insert(&mut self, station: &str, split: Split, model: &str, report: MetricsReport) {
        let key = (station.to_string(), split, model.to_string());
        if self.cells.insert(key, report).is_some() {
            log::warn!("duplicate comparison cell ({station}, {}, {model}); keeping the later one", split.label());
        }
        if !self.station_order.iter().any(|s| s == station) {
            self.station_order.push(station.to_string());
        }
        if !self.model_order.iter().any(|m| m == model) {
            self.model_order.push(model.to_string());
        }
    }

    pub fn get(&self, station: &str, split: Split, model: &str) -> Option<&MetricsReport> {
        self.cells
            .get(&(station.to_string(), split, model.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn stations(&self) -> &[String] {
        &self.station_order
    }

    pub fn models(&self) -> &[String] {
        &self.model_order
    }

    /// CSV in the published table's layout: one row per (split, metric),
    /// one column per (station, model).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("split,metric");
        for st in &self.station_order {
            for m in &self.model_order {
                let _ = write!(s, ",{st}:{m}");
            }
        }
        s.push('\n');
        for split in [Split::TrainTest, Split::Validation] {
            for (metric, get) in [
                ("mae", (|r: &MetricsReport| r.mae) as fn(&MetricsReport) -> f64),
                ("variance", |r| r.variance_pct),
                ("accuracy", |r| r.accuracy_pct),
            ] {
                let _ = write!(s, "{},{metric}", split.label());
                for st in &self.station_order {
                    for m in &self.model_order {
                        match self.get(st, split, m) {
                            Some(r) => {
                                let _ = write!(s, ",{:.4}", get(r));
                            }
                            None => s.push_str(",NA"),
                        }
                    }
                }
                s.push('\n');
            }
        }
        s
    }

    /// Aligned plain-text table for terminal output.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for st in &self.station_order {
            let _ = writeln!(s, "{st}");
            let _ = write!(s, "  {:<12}{:>10}", "", "");
            for m in &self.model_order {
                let _ = write!(s, "{m:>14}");
            }
            s.push('\n');
            for split in [Split::TrainTest, Split::Validation] {
                for (metric, get) in [
                    ("MAE", (|r: &MetricsReport| r.mae) as fn(&MetricsReport) -> f64),
                    ("Variance", |r| r.variance_pct),
                    ("Accuracy", |r| r.accuracy_pct),
                ] {
                    let _ = write!(s, "  {:<12}{:>10}", split.label(), metric);
                    for m in &self.model_order {
                        match self.get(st, split, m) {
                            Some(r) => {
                                let _ = write!(s, "{:>14.2}", get(r));
                            }
                            None => {
                                let _ = write!(s, "{:>14}", "NA");
                            }
                        }
                    }
                    s.push('\n');
                }
            }
        }
        s
    }
}

/// Assemble the full grid from raw prediction vectors. Duplicate keys keep
/// the later entry (with a logged warning).
pub fn build_comparison<'a, I>(results: I) -> Result<ComparisonTable, MetricsError>
where
    I: IntoIterator<Item = (&'a str, Split, &'a str, &'a [f64], &'a [f64])>,
{
    let mut table = ComparisonTable::default();
    for (station, split, model, y, yhat) in results {
        table.insert(station, split, model, metrics_report(y, yhat)?);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_analytic() {
        assert_eq!(mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let v = mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mae_analytic() {
        assert_eq!(mae(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(mae(&[5.0], &[5.0]).unwrap(), 0.0);
    }

    #[test]
    fn length_and_empty_errors() {
        assert_eq!(
            mse(&[1.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch { left: 1, right: 2 })
        );
        assert_eq!(mae(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn explained_variance_cases() {
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(explained_variance_pct(&y, &y).unwrap(), 100.0);
        let const_mean = [2.5; 4];
        assert!(explained_variance_pct(&y, &const_mean).unwrap().abs() < 1e-12);
        let shifted: Vec<f64> = y.iter().map(|v| v + 7.0).collect();
        assert!((explained_variance_pct(&y, &shifted).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(
            explained_variance_pct(&[3.0, 3.0], &[1.0, 2.0]),
            Err(MetricsError::ZeroVariance)
        );
    }

    #[test]
    fn accuracy_perfect_and_zero_mean() {
        let y = [10.0, 20.0];
        assert_eq!(accuracy_pct(&y, &y).unwrap(), 100.0);
        assert_eq!(
            accuracy_pct(&[0.0, 0.0], &[1.0, 1.0]),
            Err(MetricsError::ZeroMean)
        );
    }

    #[test]
    fn accuracy_reconstruction_matches_published_values() {
        // Vectors engineered so mean(y) and MAE equal the published numbers.
        let check = |target_mae: f64, published: f64| {
            let y = [356.75, 356.75];
            let yhat = [356.75 - target_mae, 356.75 + target_mae];
            let acc = accuracy_pct(&y, &yhat).unwrap();
            assert!(
                (acc - published).abs() <= 0.5,
                "mae {target_mae}: got {acc}, published {published}"
            );
        };
        check(14.73, 95.55);
        check(5.39, 98.41);
        check(4.64, 98.64);
    }

    #[test]
    fn accuracy_decreases_with_mae() {
        let y = [100.0, 100.0, 100.0];
        let a = accuracy_pct(&y, &[99.0, 100.0, 101.0]).unwrap();
        let b = accuracy_pct(&y, &[95.0, 100.0, 105.0]).unwrap();
        assert!(a > b);
    }

    #[test]
    fn jensen_mae_squared_le_mse() {
        let y = [1.0, 4.0, -2.0, 0.5, 9.0];
        let yhat = [1.5, 3.0, -1.0, 0.0, 10.0];
        let m = mae(&y, &yhat).unwrap();
        assert!(m * m <= mse(&y, &yhat).unwrap() + 1e-15);
    }

    #[test]
    fn comparison_table_marks_missing_cells() {
        let y = [10.0, 20.0];
        let yhat = [11.0, 19.0];
        let table = build_comparison(vec![(
            "bondville",
            Split::TrainTest,
            "LR",
            &y[..],
            &yhat[..],
        )])
        .unwrap();
        let csv = table.to_csv();
        assert!(csv.contains("bondville:LR"));
        assert!(csv.lines().nth(4).unwrap().contains("NA"), "{csv}");
        assert!(table.get("bondville", Split::Validation, "LR").is_none());
    }

    #[test]
    fn duplicate_cell_keeps_last_value() {
        let y = [10.0, 20.0];
        let first = [10.0, 20.0];
        let second = [0.0, 0.0];
        let table = build_comparison(vec![
            ("s", Split::TrainTest, "LR", &y[..], &first[..]),
            ("s", Split::TrainTest, "LR", &y[..], &second[..]),
        ])
        .unwrap();
        assert_eq!(table.get("s", Split::TrainTest, "LR").unwrap().mae, 15.0);
    }

    #[test]
    fn empty_input_gives_empty_table() {
        let table = build_comparison(Vec::new()).unwrap();
        assert!(table.is_empty());
    }
}
