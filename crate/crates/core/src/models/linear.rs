//! Least-squares linear regression.
//!
//! The solver runs a one-sided Jacobi SVD on the design matrix (features
//! plus a constant column), which keeps the factorization orthogonal and
//! yields the minimum-norm solution when columns are linearly dependent.

use serde::{Deserialize, Serialize};

use crate::frame::Frame;
use crate::models::ModelError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub columns: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Set when the design matrix was numerically rank deficient; the
    /// returned solution is the minimum-norm one.
    pub rank_deficient: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum-norm least squares via one-sided Jacobi orthogonalization.
/// `cols` holds the design matrix column-major; returns (solution, rank_deficient).
fn jacobi_least_squares(mut cols: Vec<Vec<f64>>, y: &[f64]) -> (Vec<f64>, bool) {
    let m = cols.len();
    let n = y.len();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = {
                    let (alpha, beta) = (dot(&cols[i], &cols[i]), dot(&cols[j], &cols[j]));
                    (alpha, beta)
                };
                let g = dot(&cols[i], &cols[j]);
                if g.abs() <= eps * (a * b).sqrt() || a == 0.0 || b == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..n {
                    let ci = cols[i][r];
                    let cj = cols[j][r];
                    cols[i][r] = c * ci - s * cj;
                    cols[j][r] = s * ci + c * cj;
                }
                for r in 0..m {
                    let vi = v[i][r];
                    let vj = v[j][r];
                    v[i][r] = c * vi - s * vj;
                    v[j][r] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigmas: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let sigma_max = sigmas.iter().cloned().fold(0.0, f64::max);
    let tol = sigma_max * f64::EPSILON * (n.max(m) as f64);

    let mut x = vec![0.0; m];
    let mut rank_deficient = false;
    for j in 0..m {
        if sigmas[j] <= tol {
            rank_deficient = true;
            continue;
        }
        // d_j = u_j . y / sigma_j, with u_j = col_j / sigma_j
        let d = dot(&cols[j], y) / (sigmas[j] * sigmas[j]);
        for r in 0..m {
            x[r] += d * v[j][r];
        }
    }
    (x, rank_deficient)
}

/// Fit weights and bias minimizing the sum of squared residuals.
pub fn fit_linear(train: &Frame) -> Result<LinearModel, ModelError> {
    let n = train.n_rows();
    let p = train.n_features();
    if n < p + 1 {
        return Err(ModelError::InsufficientRows {
            needed: p + 1,
            found: n,
        });
    }
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| train.column(j)).collect();
    cols.push(vec![1.0; n]);
    let (x, rank_deficient) = jacobi_least_squares(cols, train.y());
    if rank_deficient {
        log::warn!("linear fit: design matrix is rank deficient; returning minimum-norm solution");
    }
    Ok(LinearModel {
        columns: train.columns().to_vec(),
        weights: x[..p].to_vec(),
        bias: x[p],
        rank_deficient,
    })
}

pub fn predict_linear(model: &LinearModel, frame: &Frame) -> Result<Vec<f64>, ModelError> {
    if frame.columns() != model.columns.as_slice() {
        return Err(ModelError::FeatureMismatch {
            expected: model.columns.clone(),
            found: frame.columns().to_vec(),
        });
    }
    Ok((0..frame.n_rows())
        .map(|i| dot(frame.row(i), &model.weights) + model.bias)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn frame(columns: &[&str], x: Vec<f64>, y: Vec<f64>) -> Frame {
        let keys = (0..y.len())
            .map(|i| {
                NaiveDate::from_ymd_opt(2018, 1, 1)
                    .unwrap()
                    .and_hms_opt(7, 0, 0)
                    .unwrap()
                    + chrono::Duration::minutes(i as i64)
            })
            .collect();
        Frame::new(columns.iter().map(|s| s.to_string()).collect(), x, y, keys).unwrap()
    }

    #[test]
    fn recovers_exact_linear_relation() {
        // y = 2*x1 - 3*x2 + 5
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let a = i as f64 * 0.37 - 2.0;
            let b = (i as f64 * 1.3).sin();
            x.push(a);
            x.push(b);
            y.push(2.0 * a - 3.0 * b + 5.0);
        }
        let m = fit_linear(&frame(&["x1", "x2"], x, y)).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-8);
        assert!((m.weights[1] + 3.0).abs() < 1e-8);
        assert!((m.bias - 5.0).abs() < 1e-8);
        assert!(!m.rank_deficient);
    }

    #[test]
    fn constant_target_gives_zero_weights() {
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
        let m = fit_linear(&frame(&["x"], x, vec![4.5; 12])).unwrap();
        assert!(m.weights[0].abs() < 1e-10);
        assert!((m.bias - 4.5).abs() < 1e-10);
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..50 {
            let a = (i as f64 * 0.61).sin() * 3.0;
            let b = (i as f64 * 0.23).cos() * 2.0;
            let c = i as f64 / 25.0 - 1.0;
            x.extend([a, b, c]);
            y.push(1.5 * a - 0.2 * b + c + 0.3 + (i as f64 * 0.9).sin());
        }
        let f = frame(&["a", "b", "c"], x, y);
        let m = fit_linear(&f).unwrap();
        let preds = predict_linear(&m, &f).unwrap();
        let resid: Vec<f64> = f.y().iter().zip(&preds).map(|(t, p)| t - p).collect();
        let scale: f64 = f.y().iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..3 {
            let col = f.column(j);
            assert!(dot(&resid, &col).abs() <= 1e-6 * scale.max(1.0), "column {j}");
        }
        assert!(resid.iter().sum::<f64>().abs() <= 1e-6 * scale.max(1.0));
    }

    #[test]
    fn duplicate_columns_flag_rank_deficiency() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let a = i as f64;
            x.extend([a, a]);
            y.push(3.0 * a + 1.0);
        }
        let m = fit_linear(&frame(&["a", "a2"], x, y)).unwrap();
        assert!(m.rank_deficient);
        // Minimum-norm splits the coefficient evenly across the duplicates.
        assert!((m.weights[0] - 1.5).abs() < 1e-8);
        assert!((m.weights[1] - 1.5).abs() < 1e-8);
    }

    #[test]
    fn predict_checks_columns() {
        let f = frame(&["x"], (0..12).map(|i| i as f64).collect(), vec![0.0; 12]);
        let m = fit_linear(&f).unwrap();
        let other = frame(&["z"], vec![1.0; 12], vec![0.0; 12]);
        assert!(matches!(
            predict_linear(&m, &other),
            Err(ModelError::FeatureMismatch { .. })
        ));
    }

    #[test]
    fn predict_trivial_cases() {
        let m = LinearModel {
            columns: vec!["x".to_string()],
            weights: vec![1.0],
            bias: 0.0,
            rank_deficient: false,
        };
        let f = frame(&["x"], vec![7.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(predict_linear(&m, &f).unwrap(), vec![7.0, 0.0]);
        let m2 = LinearModel {
            columns: vec!["x".to_string()],
            weights: vec![0.0],
            bias: 2.5,
            rank_deficient: false,
        };
        assert_eq!(predict_linear(&m2, &f).unwrap(), vec![2.5, 2.5]);
    }
}
