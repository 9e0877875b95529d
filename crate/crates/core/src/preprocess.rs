//! Cleaning, daytime windowing, summary statistics, supervised framing of
//! the next-minute GHI task, normalization, and train/test splitting.

use chrono::Duration;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::frame::{Frame, FrameError};
use crate::ingest::{StationDataset, Var};

/// The candidate variable set used for cleaning, summary statistics, and
/// (together with the derived time fields) supervised framing.
pub const MODEL_VARS: [&str; 15] = [
    "dt",
    "zen",
    "dw_solar",
    "diffuse",
    "dw_ir",
    "uw_dometemp",
    "uvb",
    "par",
    "netsolar",
    "totalnet",
    "temp",
    "rh",
    "windspd",
    "winddir",
    "pressure",
];

/// Time fields appended to every supervised frame.
pub const TIME_FEATURES: [&str; 3] = ["minute", "hour", "month"];

/// Daytime window: rows with hour in `[7, 16)` are kept.
pub const DAY_START_HOUR: u32 = 7;
pub const DAY_END_HOUR: u32 = 16;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("no rows survive cleaning")]
    EmptyAfterClean,
    #[error("need at least {needed} usable rows, found {found}")]
    InsufficientRows { needed: usize, found: usize },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("normalization parameters cover columns {expected:?}, frame has {found:?}")]
    NormColumnMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Drop every row with a sentinel or a nonzero QC flag in any model-relevant
/// variable. No imputation: the row is removed entirely.
pub fn clean(ds: &StationDataset) -> Result<StationDataset, PreprocessError> {
    clean_with_vars(ds, &MODEL_VARS)
}

pub fn clean_with_vars(
    ds: &StationDataset,
    vars: &[&str],
) -> Result<StationDataset, PreprocessError> {
    let rows: Vec<_> = ds
        .rows()
        .iter()
        .filter(|obs| vars.iter().all(|v| obs.is_valid(v)))
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(PreprocessError::EmptyAfterClean);
    }
    Ok(StationDataset::new(ds.meta.clone(), rows).expect("subset of a valid dataset"))
}

/// Keep the nine daytime hours: 07:00 inclusive through 16:00 exclusive.
pub fn daytime_filter(ds: &StationDataset) -> StationDataset {
    let rows: Vec<_> = ds
        .rows()
        .iter()
        .filter(|o| (DAY_START_HOUR..DAY_END_HOUR).contains(&o.hour))
        .cloned()
        .collect();
    StationDataset::new(ds.meta.clone(), rows).expect("subset of a valid dataset")
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

/// Per-variable basic statistics over a dataset.
#[derive(Debug, Clone)]
pub struct SummaryStats {
    pub variables: Vec<(String, VarStats)>,
}

impl SummaryStats {
    pub fn get(&self, name: &str) -> Option<&VarStats> {
        self.variables.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// CSV with one row per variable.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("variable,count,mean,std,min,p25,p50,p75,max\n");
        for (name, v) in &self.variables {
            s.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                name, v.count, v.mean, v.std, v.min, v.p25, v.p50, v.p75, v.max
            ));
        }
        s
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between order statistics.
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population (1/N) standard deviation.
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Count / mean / std / min / quartiles / max for each model variable.
pub fn summary_stats(ds: &StationDataset) -> SummaryStats {
    let mut variables = Vec::with_capacity(MODEL_VARS.len());
    for name in MODEL_VARS {
        let mut vals: Vec<f64> = ds
            .rows()
            .iter()
            .filter_map(|o| o.value_by_name(name))
            .collect();
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(f64::total_cmp);
        let stats = VarStats {
            count: vals.len(),
            mean: mean(&vals),
            std: population_std(&vals),
            min: vals[0],
            p25: quantile(&vals, 0.25),
            p50: quantile(&vals, 0.50),
            p75: quantile(&vals, 0.75),
            max: vals[vals.len() - 1],
        };
        variables.push((name.to_string(), stats));
    }
    SummaryStats { variables }
}

/// Frame the next-minute GHI task: each row whose successor exists exactly
/// one minute later yields one sample with features from the earlier row
/// (plus derived minute / hour / month) and target `dw_solar` of the later.
/// Pairing is by timestamp arithmetic, so cleaning gaps and the 16:00
/// boundary never produce mislabeled samples.
pub fn make_supervised(
    ds: &StationDataset,
    features: &[&str],
) -> Result<Frame, PreprocessError> {
    let mut columns: Vec<String> = features.iter().map(|s| s.to_string()).collect();
    for t in TIME_FEATURES {
        if !columns.iter().any(|c| c == t) {
            columns.push(t.to_string());
        }
    }
    for name in &columns {
        let known = Var::from_name(name).is_some()
            || matches!(name.as_str(), "dt" | "zen" | "minute" | "hour" | "month");
        if !known {
            return Err(PreprocessError::UnknownFeature(name.clone()));
        }
    }

    let rows = ds.rows();
    if rows.len() < 2 {
        return Err(PreprocessError::InsufficientRows {
            needed: 2,
            found: rows.len(),
        });
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut keys = Vec::new();
    for w in rows.windows(2) {
        let (now, next) = (&w[0], &w[1]);
        if next.timestamp() - now.timestamp() != Duration::minutes(1) {
            continue;
        }
        for name in &columns {
            x.push(now.value_by_name(name).expect("validated feature name"));
        }
        y.push(next.value(Var::DwSolar));
        keys.push(now.timestamp());
    }
    if y.is_empty() {
        return Err(PreprocessError::InsufficientRows {
            needed: 1,
            found: 0,
        });
    }
    Ok(Frame::new(columns, x, y, keys)?)
}

/// Per-feature z-score parameters, fit on training rows only.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormParams {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    /// Population standard deviation, recorded before any clamping.
    pub stds: Vec<f64>,
}

pub fn zscore_fit(frame: &Frame) -> NormParams {
    let mut means = Vec::with_capacity(frame.n_features());
    let mut stds = Vec::with_capacity(frame.n_features());
    for j in 0..frame.n_features() {
        let col = frame.column(j);
        means.push(mean(&col));
        stds.push(population_std(&col));
    }
    NormParams {
        columns: frame.columns().to_vec(),
        means,
        stds,
    }
}

/// Apply `(x - mean) / std` per feature; zero-variance columns map to 0.
/// The target is left in physical units.
pub fn zscore_apply(frame: &Frame, params: &NormParams) -> Result<Frame, PreprocessError> {
    if frame.columns() != params.columns.as_slice() {
        return Err(PreprocessError::NormColumnMismatch {
            expected: params.columns.clone(),
            found: frame.columns().to_vec(),
        });
    }
    let p = frame.n_features();
    let mut x = Vec::with_capacity(frame.n_rows() * p);
    for i in 0..frame.n_rows() {
        for (j, v) in frame.row(i).iter().enumerate() {
            if params.stds[j] == 0.0 {
                x.push(0.0);
            } else {
                x.push((v - params.means[j]) / params.stds[j]);
            }
        }
    }
    Ok(Frame::new(
        frame.columns().to_vec(),
        x,
        frame.y().to_vec(),
        frame.row_keys().to_vec(),
    )?)
}

/// Undo `zscore_apply`. Zero-variance columns recover their mean.
pub fn zscore_invert(frame: &Frame, params: &NormParams) -> Result<Frame, PreprocessError> {
    if frame.columns() != params.columns.as_slice() {
        return Err(PreprocessError::NormColumnMismatch {
            expected: params.columns.clone(),
            found: frame.columns().to_vec(),
        });
    }
    let p = frame.n_features();
    let mut x = Vec::with_capacity(frame.n_rows() * p);
    for i in 0..frame.n_rows() {
        for (j, v) in frame.row(i).iter().enumerate() {
            x.push(v * params.stds[j] + params.means[j]);
        }
    }
    Ok(Frame::new(
        frame.columns().to_vec(),
        x,
        frame.y().to_vec(),
        frame.row_keys().to_vec(),
    )?)
}

fn split_at(frame: &Frame, order: &[usize]) -> (Frame, Frame) {
    let n_train = (0.7 * order.len() as f64).ceil() as usize;
    (
        frame.subset_rows(&order[..n_train]),
        frame.subset_rows(&order[n_train..]),
    )
}

/// Random 70/30 split: a seeded uniform permutation, first ⌈0.7·n⌉ rows to
/// train. Deterministic for a fixed seed.
pub fn split_70_30(frame: &Frame, seed: u64) -> Result<(Frame, Frame), PreprocessError> {
    if frame.n_rows() < 10 {
        return Err(PreprocessError::InsufficientRows {
            needed: 10,
            found: frame.n_rows(),
        });
    }
    let mut order: Vec<usize> = (0..frame.n_rows()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(split_at(frame, &order))
}

/// Chronological 70/30 split (earliest rows to train), for sensitivity checks.
pub fn split_chronological(frame: &Frame) -> Result<(Frame, Frame), PreprocessError> {
    if frame.n_rows() < 10 {
        return Err(PreprocessError::InsufficientRows {
            needed: 10,
            found: frame.n_rows(),
        });
    }
    let mut order: Vec<usize> = (0..frame.n_rows()).collect();
    order.sort_by_key(|&i| frame.row_keys()[i]);
    Ok(split_at(frame, &order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Observation, StationMeta, SENTINEL};
    use chrono::{Datelike, NaiveDate, Timelike};

    fn meta() -> StationMeta {
        StationMeta {
            name: "test".to_string(),
            latitude: 40.0,
            longitude: -88.0,
            elevation_m: 200.0,
        }
    }

    pub(crate) fn obs(year: i32, month: u32, day: u32, hour: u32, minute: u32, ghi: f64) -> Observation {
        let date = NaiveDate::from_ymd_opt(year, month, day).unwrap();
        let mut values = [1.0; Var::COUNT];
        values[Var::DwSolar.index()] = ghi;
        Observation::new(
            year,
            date.ordinal(),
            month,
            day,
            hour,
            minute,
            hour as f64 + minute as f64 / 60.0,
            50.0,
            values,
            [0; Var::COUNT],
        )
    }

    fn dataset(rows: Vec<Observation>) -> StationDataset {
        StationDataset::new(meta(), rows).unwrap()
    }

    #[test]
    fn clean_drops_sentinel_rows() {
        let mut bad = obs(2018, 1, 1, 8, 1, 100.0);
        bad.set_value(Var::Temp, SENTINEL);
        let ds = dataset(vec![obs(2018, 1, 1, 8, 0, 100.0), bad]);
        let out = clean(&ds).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.rows()[0].minute, 0);
    }

    #[test]
    fn clean_drops_qc_flagged_rows() {
        let mut flagged = obs(2018, 1, 1, 8, 1, 100.0);
        flagged.set_qc(Var::Rh, 3);
        let ds = dataset(vec![obs(2018, 1, 1, 8, 0, 100.0), flagged]);
        assert_eq!(clean(&ds).unwrap().len(), 1);
    }

    #[test]
    fn clean_is_identity_without_sentinels() {
        let ds = dataset(vec![
            obs(2018, 1, 1, 8, 0, 100.0),
            obs(2018, 1, 1, 8, 1, 110.0),
        ]);
        assert_eq!(clean(&ds).unwrap().len(), 2);
    }

    #[test]
    fn clean_reports_empty_result() {
        let mut bad = obs(2018, 1, 1, 8, 0, 100.0);
        bad.set_value(Var::Pressure, SENTINEL);
        let ds = dataset(vec![bad]);
        assert!(matches!(clean(&ds), Err(PreprocessError::EmptyAfterClean)));
    }

    #[test]
    fn daytime_window_boundaries() {
        let ds = dataset(vec![
            obs(2018, 1, 1, 6, 59, 1.0),
            obs(2018, 1, 1, 7, 0, 2.0),
            obs(2018, 1, 1, 15, 59, 3.0),
            obs(2018, 1, 1, 16, 0, 4.0),
        ]);
        let out = daytime_filter(&ds);
        let hours: Vec<u32> = out.rows().iter().map(|o| o.hour).collect();
        assert_eq!(hours, vec![7, 15]);
    }

    #[test]
    fn daytime_filter_is_idempotent() {
        let ds = dataset((0..24).map(|h| obs(2018, 1, 1, h, 0, 1.0)).collect());
        let once = daytime_filter(&ds);
        let twice = daytime_filter(&once);
        assert_eq!(once.len(), twice.len());
        assert_eq!(once.len(), 9);
    }

    fn full_day(year: i32, month: u32, day: u32) -> Vec<Observation> {
        let mut rows = Vec::new();
        for h in 0..24 {
            for m in 0..60 {
                rows.push(obs(year, month, day, h, m, (h * 60 + m) as f64));
            }
        }
        rows
    }

    #[test]
    fn gap_free_day_yields_539_samples() {
        let ds = daytime_filter(&dataset(full_day(2018, 6, 1)));
        assert_eq!(ds.len(), 540);
        let frame = make_supervised(&ds, &["temp", "zen"]).unwrap();
        assert_eq!(frame.n_rows(), 539);
    }

    #[test]
    fn supervised_target_is_next_minute_ghi() {
        let ds = dataset(vec![
            obs(2018, 1, 1, 8, 0, 100.0),
            obs(2018, 1, 1, 8, 1, 110.0),
        ]);
        let frame = make_supervised(&ds, &["temp"]).unwrap();
        assert_eq!(frame.n_rows(), 1);
        assert_eq!(frame.y(), &[110.0]);
        assert_eq!(
            frame.columns(),
            &["temp", "minute", "hour", "month"]
        );
    }

    #[test]
    fn supervised_skips_gaps() {
        let ds = dataset(vec![
            obs(2018, 1, 1, 7, 0, 100.0),
            obs(2018, 1, 1, 7, 2, 120.0),
            obs(2018, 1, 1, 7, 3, 130.0),
        ]);
        let frame = make_supervised(&ds, &["temp"]).unwrap();
        assert_eq!(frame.n_rows(), 1);
        assert_eq!(frame.y(), &[130.0]);
    }

    #[test]
    fn supervised_never_pairs_across_days() {
        let mut rows = full_day(2018, 6, 1);
        rows.extend(full_day(2018, 6, 2));
        let ds = daytime_filter(&dataset(rows));
        let frame = make_supervised(&ds, &["temp"]).unwrap();
        assert_eq!(frame.n_rows(), 2 * 539);
        for (i, key) in frame.row_keys().iter().enumerate() {
            assert!(key.hour() >= 7 && key.hour() < 16, "row {i} at {key}");
            assert_ne!((key.hour(), key.minute()), (15, 59));
        }
    }

    #[test]
    fn supervised_requires_two_rows() {
        let ds = dataset(vec![obs(2018, 1, 1, 8, 0, 1.0)]);
        assert!(matches!(
            make_supervised(&ds, &["temp"]),
            Err(PreprocessError::InsufficientRows { .. })
        ));
    }

    #[test]
    fn zscore_analytic_example() {
        let f = Frame::new(
            vec!["a".to_string()],
            vec![1.0, 2.0, 3.0],
            vec![0.0; 3],
            (0..3).map(crate::frame::tests::key).collect(),
        )
        .unwrap();
        let params = zscore_fit(&f);
        assert!((params.means[0] - 2.0).abs() < 1e-12);
        assert!((params.stds[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let applied = zscore_apply(&f, &params).unwrap();
        let expect = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, e) in applied.x().iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zscore_constant_column_maps_to_zero() {
        let f = Frame::new(
            vec!["a".to_string()],
            vec![5.0, 5.0],
            vec![0.0; 2],
            (0..2).map(crate::frame::tests::key).collect(),
        )
        .unwrap();
        let applied = zscore_apply(&f, &zscore_fit(&f)).unwrap();
        assert_eq!(applied.x(), &[0.0, 0.0]);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let n = 10;
        let f = Frame::new(
            vec!["a".to_string()],
            (0..n).map(|i| i as f64).collect(),
            vec![0.0; n],
            (0..n).map(crate::frame::tests::key).collect(),
        )
        .unwrap();
        let (tr, te) = split_70_30(&f, 1).unwrap();
        assert_eq!(tr.n_rows(), 7);
        assert_eq!(te.n_rows(), 3);
        let (tr2, te2) = split_70_30(&f, 1).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
    }

    #[test]
    fn split_size_arithmetic_matches_independent_ceil() {
        assert_eq!((0.7f64 * 156497.0).ceil() as usize, 109548);
        assert_eq!(156497 - 109548, 46949);
    }

    #[test]
    fn split_rejects_tiny_frames() {
        let f = Frame::new(
            vec!["a".to_string()],
            vec![1.0; 4],
            vec![0.0; 4],
            (0..4).map(crate::frame::tests::key).collect(),
        )
        .unwrap();
        assert!(matches!(
            split_70_30(&f, 0),
            Err(PreprocessError::InsufficientRows { .. })
        ));
    }

    #[test]
    fn stats_single_row_degenerates() {
        let ds = dataset(vec![obs(2018, 3, 5, 9, 30, 77.0)]);
        let stats = summary_stats(&ds);
        let s = stats.get("dw_solar").unwrap();
        assert_eq!(s.count, 1);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.min, s.max);
        assert_eq!(s.min, s.mean);
    }

    #[test]
    fn stats_two_value_symmetry() {
        let ds = dataset(vec![
            obs(2018, 1, 1, 8, 0, 0.0),
            obs(2018, 1, 1, 8, 1, 10.0),
        ]);
        let stats = summary_stats(&ds);
        let s = stats.get("dw_solar").unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.p50, 5.0);
    }
}
