//! End-to-end orchestration: load station archives, clean and window them,
//! frame the next-minute task, split, normalize, select features, train the
//! requested models, evaluate on the held-out test split and on the
//! validation year, and write every report to the output directory.
//!
//! The validation year flows one way: it is cleaned and framed with the
//! training-fit normalization and the training-selected features, and never
//! touches normalization fitting, feature selection, or GA fitness. The
//! [`RunObserver`] hook exposes exactly which rows each of those stages saw
//! so tests can prove the firewall holds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use chrono::{Datelike, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{fit_forest, impurity_importance, select_top_k, ForestConfig};
use crate::fetch;
use crate::ga::{default_search_space, evolve_gbdt, GaConfig};
use crate::ingest::{load_station, station_by_id, StationDataset, StationInfo};
use crate::metrics::{build_comparison, ComparisonTable, Split};
use crate::models::{
    fit_gbdt, fit_linear, four_xgb_presets, save_model, GbdtConfig, ModelArtifact,
};
use crate::preprocess::{
    clean, daytime_filter, make_supervised, split_70_30, split_chronological, summary_stats,
    zscore_apply, zscore_fit, MODEL_VARS,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Data { stage: String, message: String },
    #[error("{stage}: {message}")]
    Numeric { stage: String, message: String },
    #[error("no {month:02}-month rows in the validation predictions for `{station}`")]
    NoSuchMonth { station: String, month: u32 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit code class: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data { .. }
            | PipelineError::NoSuchMonth { .. }
            | PipelineError::Io { .. } => 3,
            PipelineError::Numeric { .. } => 4,
        }
    }
}

fn data_err(stage: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Data {
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

fn numeric_err(stage: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Numeric {
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Xgb,
    Ga,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<ModelKind> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Some(ModelKind::Lr),
            "xgb" => Some(ModelKind::Xgb),
            "ga" => Some(ModelKind::Ga),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitStrategy {
    Random,
    Chronological,
}

fn default_stations() -> Vec<String> {
    vec![
        "bondville".to_string(),
        "desertrock".to_string(),
        "pennstate".to_string(),
    ]
}
fn default_train_years() -> Vec<i32> {
    vec![2018, 2019]
}
fn default_validation_year() -> i32 {
    2020
}
fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Lr, ModelKind::Xgb, ModelKind::Ga]
}
fn default_xgb_preset() -> String {
    "XGB-100".to_string()
}
fn default_ga_generations() -> usize {
    10
}
fn default_seed() -> u64 {
    42
}
fn default_k_features() -> usize {
    8
}
fn default_data_root() -> PathBuf {
    PathBuf::from("data")
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_split() -> SplitStrategy {
    SplitStrategy::Random
}

/// Everything a run needs; serializable so configs can be archived and
/// replayed. Every field has a CLI flag override.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub stations: Vec<String>,
    pub train_years: Vec<i32>,
    pub validation_year: i32,
    pub models: Vec<ModelKind>,
    pub xgb_preset: String,
    pub ga_generations: usize,
    pub seed: u64,
    pub k_features: usize,
    pub data_root: PathBuf,
    pub offline: bool,
    pub output_dir: PathBuf,
    pub split: SplitStrategy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stations: default_stations(),
            train_years: default_train_years(),
            validation_year: default_validation_year(),
            models: default_models(),
            xgb_preset: default_xgb_preset(),
            ga_generations: default_ga_generations(),
            seed: default_seed(),
            k_features: default_k_features(),
            data_root: default_data_root(),
            offline: false,
            output_dir: default_output_dir(),
            split: default_split(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.stations.is_empty() {
            return Err(PipelineError::Config("no stations requested".to_string()));
        }
        for s in &self.stations {
            if station_by_id(s).is_none() {
                return Err(PipelineError::Config(format!("unknown station `{s}`")));
            }
        }
        if self.train_years.is_empty() {
            return Err(PipelineError::Config("no training years".to_string()));
        }
        if self.train_years.contains(&self.validation_year) {
            return Err(PipelineError::Config(format!(
                "validation year {} overlaps the training years",
                self.validation_year
            )));
        }
        if self.models.is_empty() {
            return Err(PipelineError::Config("no models requested".to_string()));
        }
        if self.k_features == 0 {
            return Err(PipelineError::Config("k_features must be >= 1".to_string()));
        }
        if !four_xgb_presets().iter().any(|p| p.name == self.xgb_preset) {
            return Err(PipelineError::Config(format!(
                "unknown preset `{}`; known: {}",
                self.xgb_preset,
                four_xgb_presets()
                    .iter()
                    .map(|p| p.name)
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        Ok(())
    }
}

/// Stages whose inputs are subject to the validation-year firewall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitStage {
    NormalizationFit,
    FeatureSelection,
    GaFitness,
}

/// Test hook: receives the row keys every firewalled stage trains on.
/// Stations may run concurrently, so implementations must be `Send`;
/// calls for one station always arrive in stage order.
pub trait RunObserver: Send {
    fn stage_rows(&mut self, _station: &str, _stage: FitStage, _rows: &[NaiveDateTime]) {}
}

pub struct NoopObserver;
impl RunObserver for NoopObserver {}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RowCounts {
    pub loaded: usize,
    pub cleaned: usize,
    pub daytime: usize,
    pub samples: usize,
    pub train: usize,
    pub test: usize,
    pub validation_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationRun {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_exit_code: Option<i32>,
    pub row_counts: RowCounts,
    pub selected_features: Vec<String>,
    pub artifacts: BTreeMap<String, PathBuf>,
    /// (stage, wall-clock seconds); the only nondeterministic manifest data
    /// besides the run timestamps.
    pub stage_seconds: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub stations: BTreeMap<String, StationRun>,
    pub metrics_csv: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(path, &text)
    }

    pub fn load(path: &Path) -> Result<RunManifest, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| data_err("manifest", e))
    }

    /// True when every station completed.
    pub fn all_ok(&self) -> bool {
        self.stations.values().all(|s| s.status == "ok")
    }

    /// Worst per-station exit code, if any station failed.
    pub fn failure_exit_code(&self) -> Option<i32> {
        self.stations.values().filter_map(|s| s.error_exit_code).max()
    }
}

pub struct RunOutput {
    pub manifest: RunManifest,
    pub table: ComparisonTable,
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Per-station seed derived from the master seed, so station order never
/// changes results.
fn station_seed(master: u64, id: &str) -> u64 {
    crate::ingest::derive_seed(master, id)
}

struct StationOutput {
    run: StationRun,
    /// (split, model label, truth, predictions)
    cells: Vec<(Split, String, Vec<f64>, Vec<f64>)>,
    outputs: Vec<PathBuf>,
}

fn load_or_fetch(
    cfg: &RunConfig,
    info: &StationInfo,
    years: &[i32],
    stage: &str,
) -> Result<StationDataset, PipelineError> {
    match load_station(&cfg.data_root, info, years) {
        Ok(ds) => Ok(ds),
        Err(crate::ingest::IngestError::MissingData { station, year, root }) if !cfg.offline => {
            log::info!("{stage}: no local files for {station}/{year}; fetching from the archive");
            fetch::fetch(&[info], years, &cfg.data_root).map_err(|e| data_err(stage, e))?;
            load_station(&cfg.data_root, info, years).map_err(|e| {
                data_err(
                    stage,
                    format!("still missing after fetch (root {}): {e}", root.display()),
                )
            })
        }
        Err(e) => Err(data_err(stage, e)),
    }
}

fn run_station(
    cfg: &RunConfig,
    info: &StationInfo,
    observer: &Mutex<&mut dyn RunObserver>,
) -> Result<StationOutput, PipelineError> {
    let station_dir = cfg.output_dir.join(info.id);
    let seed = station_seed(cfg.seed, info.id);
    let mut timings: Vec<(String, f64)> = Vec::new();
    let mut artifacts = BTreeMap::new();
    let mut outputs = Vec::new();
    let mut counts = RowCounts::default();

    macro_rules! timed {
        ($name:expr, $body:expr) => {{
            let t = Instant::now();
            let out = $body;
            timings.push(($name.to_string(), t.elapsed().as_secs_f64()));
            out
        }};
    }

    let train_raw = timed!(
        "load-train",
        load_or_fetch(cfg, info, &cfg.train_years, "load-train")?
    );
    let val_raw = timed!(
        "load-validation",
        load_or_fetch(cfg, info, &[cfg.validation_year], "load-validation")?
    );
    counts.loaded = train_raw.len() + val_raw.len();

    let (train_clean, val_clean) = timed!("clean", {
        let t = clean(&train_raw).map_err(|e| data_err("clean", e))?;
        let v = clean(&val_raw).map_err(|e| data_err("clean-validation", e))?;
        (t, v)
    });
    counts.cleaned = train_clean.len() + val_clean.len();

    let (train_day, val_day) = timed!("daytime", {
        (daytime_filter(&train_clean), daytime_filter(&val_clean))
    });
    counts.daytime = train_day.len() + val_day.len();

    timed!("stats", {
        let stats = summary_stats(&train_day);
        let path = station_dir.join("summary_stats.csv");
        write_file(&path, &stats.to_csv())?;
        artifacts.insert("summary_stats".to_string(), path.clone());
        outputs.push(path);
    });

    let (frame_all, val_all) = timed!("frame", {
        let f = make_supervised(&train_day, &MODEL_VARS).map_err(|e| data_err("frame", e))?;
        let v = make_supervised(&val_day, &MODEL_VARS)
            .map_err(|e| data_err("frame-validation", e))?;
        (f, v)
    });
    counts.samples = frame_all.n_rows();
    counts.validation_samples = val_all.n_rows();

    let (train_frame, test_frame) = timed!(
        "split",
        match cfg.split {
            SplitStrategy::Random => split_70_30(&frame_all, seed),
            SplitStrategy::Chronological => split_chronological(&frame_all),
        }
        .map_err(|e| data_err("split", e))?
    );
    counts.train = train_frame.n_rows();
    counts.test = test_frame.n_rows();

    let (train_n, test_n, val_n) = timed!("normalize", {
        observer
            .lock()
            .expect("observer lock")
            .stage_rows(info.id, FitStage::NormalizationFit, train_frame.row_keys());
        let params = zscore_fit(&train_frame);
        let t = zscore_apply(&train_frame, &params).map_err(|e| numeric_err("normalize", e))?;
        let s = zscore_apply(&test_frame, &params).map_err(|e| numeric_err("normalize", e))?;
        let v = zscore_apply(&val_all, &params).map_err(|e| numeric_err("normalize", e))?;
        (t, s, v)
    });

    let selected = timed!("feature-selection", {
        observer
            .lock()
            .expect("observer lock")
            .stage_rows(info.id, FitStage::FeatureSelection, train_n.row_keys());
        let forest_cfg = ForestConfig {
            seed,
            ..ForestConfig::default()
        };
        let forest =
            fit_forest(&train_n, &forest_cfg).map_err(|e| numeric_err("feature-selection", e))?;
        let report = impurity_importance(&forest);
        let path = station_dir.join("importance.csv");
        write_file(&path, &report.to_csv())?;
        artifacts.insert("importance".to_string(), path.clone());
        outputs.push(path);
        select_top_k(&report, cfg.k_features).map_err(|e| numeric_err("feature-selection", e))?
    });

    let train_s = train_n
        .select_columns(&selected)
        .map_err(|e| numeric_err("feature-selection", e))?;
    let test_s = test_n
        .select_columns(&selected)
        .map_err(|e| numeric_err("feature-selection", e))?;
    let val_s = val_n
        .select_columns(&selected)
        .map_err(|e| numeric_err("feature-selection", e))?;

    let mut cells = Vec::new();
    let mut model_labels = Vec::new();
    let mut val_preds_by_model: Vec<(String, Vec<f64>)> = Vec::new();

    for kind in &cfg.models {
        let (label, artifact) = match kind {
            ModelKind::Lr => {
                let model = timed!(
                    "train-lr",
                    fit_linear(&train_s).map_err(|e| numeric_err("train-lr", e))?
                );
                ("LR".to_string(), ModelArtifact::Linear(model))
            }
            ModelKind::Xgb => {
                let preset = four_xgb_presets()
                    .into_iter()
                    .find(|p| p.name == cfg.xgb_preset)
                    .expect("validated config");
                let gcfg = GbdtConfig { seed, ..preset.config };
                let model = timed!(
                    "train-xgb",
                    fit_gbdt(&train_s, &gcfg).map_err(|e| numeric_err("train-xgb", e))?
                );
                (preset.name.to_string(), ModelArtifact::Gbdt(model))
            }
            ModelKind::Ga => {
                let n = train_s.n_rows();
                let holdout_len = ((n as f64 * 0.2).round() as usize).clamp(1, n - 1);
                let ga_train_idx: Vec<usize> = (0..n - holdout_len).collect();
                let ga_holdout_idx: Vec<usize> = (n - holdout_len..n).collect();
                let ga_train = train_s.subset_rows(&ga_train_idx);
                let ga_holdout = train_s.subset_rows(&ga_holdout_idx);
                let mut fitness_keys = ga_train.row_keys().to_vec();
                fitness_keys.extend_from_slice(ga_holdout.row_keys());
                observer
                    .lock()
                    .expect("observer lock")
                    .stage_rows(info.id, FitStage::GaFitness, &fitness_keys);

                let ga_cfg = GaConfig {
                    generations: cfg.ga_generations,
                    seed,
                    ..GaConfig::default()
                };
                let (best, history) = timed!(
                    "ga-search",
                    evolve_gbdt(&default_search_space(), &ga_cfg, &ga_train, &ga_holdout)
                        .map_err(|e| numeric_err("ga-search", e))?
                );
                let path = station_dir.join("ga_history.csv");
                write_file(&path, &history.to_csv())?;
                artifacts.insert("ga_history".to_string(), path.clone());
                outputs.push(path);

                let best_cfg = GbdtConfig {
                    seed,
                    ..best.decode().map_err(|e| numeric_err("ga-search", e))?
                };
                let model = timed!(
                    "train-ga",
                    fit_gbdt(&train_s, &best_cfg).map_err(|e| numeric_err("train-ga", e))?
                );
                (
                    format!("GA-{}", cfg.ga_generations),
                    ModelArtifact::Gbdt(model),
                )
            }
        };

        let path = station_dir.join(format!("model_{}.json", label.to_lowercase()));
        save_model(&path, &artifact).map_err(|e| numeric_err("save-model", e))?;
        artifacts.insert(format!("model:{label}"), path.clone());
        outputs.push(path);

        let test_preds = artifact
            .predict(&test_s)
            .map_err(|e| numeric_err("evaluate", e))?;
        let val_preds = artifact
            .predict(&val_s)
            .map_err(|e| numeric_err("evaluate", e))?;
        cells.push((Split::TrainTest, label.clone(), test_s.y().to_vec(), test_preds));
        cells.push((Split::Validation, label.clone(), val_s.y().to_vec(), val_preds.clone()));
        val_preds_by_model.push((label.clone(), val_preds));
        model_labels.push(label);
    }

    timed!("persist-predictions", {
        let mut csv = String::from("timestamp,actual");
        for label in &model_labels {
            csv.push(',');
            csv.push_str(label);
        }
        csv.push('\n');
        for (i, key) in val_s.row_keys().iter().enumerate() {
            csv.push_str(&format!("{}", key.format(crate::frame::TIMESTAMP_FMT)));
            csv.push_str(&format!(",{}", val_s.y()[i]));
            for (_, preds) in &val_preds_by_model {
                csv.push_str(&format!(",{}", preds[i]));
            }
            csv.push('\n');
        }
        let path = station_dir.join("validation_predictions.csv");
        write_file(&path, &csv)?;
        artifacts.insert("validation_predictions".to_string(), path.clone());
        outputs.push(path);
    });

    Ok(StationOutput {
        run: StationRun {
            status: "ok".to_string(),
            error_exit_code: None,
            row_counts: counts,
            selected_features: selected,
            artifacts,
            stage_seconds: timings,
        },
        cells,
        outputs,
    })
}

/// Run the whole pipeline for every requested station. Station failures are
/// recorded in the manifest and do not abort the remaining stations.
pub fn run_with_observer(
    config: &RunConfig,
    observer: &mut dyn RunObserver,
) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let started_at = chrono::Local::now().to_rfc3339();

    let mut stations = BTreeMap::new();
    let mut all_cells: Vec<(String, Split, String, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut outputs = Vec::new();

    // Stations are independent; run them concurrently and stitch results
    // back together in config order so output is order-independent.
    let shared = Mutex::new(observer);
    let results: Vec<(String, Result<StationOutput, PipelineError>)> = config
        .stations
        .par_iter()
        .map(|id| {
            let info = station_by_id(id).expect("validated config");
            (id.clone(), run_station(config, info, &shared))
        })
        .collect();

    for (id, result) in results {
        match result {
            Ok(out) => {
                for (split, model, y, yhat) in out.cells {
                    all_cells.push((id.clone(), split, model, y, yhat));
                }
                outputs.extend(out.outputs);
                stations.insert(id, out.run);
            }
            Err(e) => {
                log::error!("station {id} failed: {e}");
                stations.insert(
                    id,
                    StationRun {
                        status: format!("failed: {e}"),
                        error_exit_code: Some(e.exit_code()),
                        row_counts: RowCounts::default(),
                        selected_features: Vec::new(),
                        artifacts: BTreeMap::new(),
                        stage_seconds: Vec::new(),
                    },
                );
            }
        }
    }

    let table = build_comparison(
        all_cells
            .iter()
            .map(|(s, sp, m, y, yh)| (s.as_str(), *sp, m.as_str(), y.as_slice(), yh.as_slice())),
    )
    .map_err(|e| numeric_err("metrics", e))?;

    let metrics_csv = config.output_dir.join("metrics.csv");
    write_file(&metrics_csv, &table.to_csv())?;
    outputs.push(metrics_csv.clone());

    let mut manifest = RunManifest {
        config: config.clone(),
        stations,
        metrics_csv,
        outputs,
        started_at,
        finished_at: chrono::Local::now().to_rfc3339(),
    };
    let manifest_path = config.output_dir.join("manifest.json");
    manifest.outputs.push(manifest_path.clone());
    manifest.save(&manifest_path)?;

    Ok(RunOutput { manifest, table })
}

/// Run with no instrumentation and return the manifest.
pub fn run(config: &RunConfig) -> Result<RunManifest, PipelineError> {
    Ok(run_with_observer(config, &mut NoopObserver)?.manifest)
}

/// Extract one month of the persisted validation predictions as a plot-data
/// CSV `(timestamp, actual, one column per trained model)`.
pub fn emit_plot_data(
    manifest: &RunManifest,
    station: &str,
    month: u32,
) -> Result<PathBuf, PipelineError> {
    if !(1..=12).contains(&month) {
        return Err(PipelineError::Config(format!("month {month} not in 1..=12")));
    }
    let srun = manifest.stations.get(station).ok_or_else(|| {
        PipelineError::Config(format!("station `{station}` is not part of this run"))
    })?;
    let preds_path = srun.artifacts.get("validation_predictions").ok_or_else(|| {
        data_err(
            "plot-data",
            format!("run holds no validation predictions for `{station}`"),
        )
    })?;
    let text = std::fs::read_to_string(preds_path).map_err(|source| PipelineError::Io {
        path: preds_path.clone(),
        source,
    })?;

    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let mut out = String::from(header);
    out.push('\n');
    let mut kept = 0usize;
    for line in lines {
        let ts = line.split(',').next().unwrap_or_default();
        let parsed = NaiveDateTime::parse_from_str(ts, crate::frame::TIMESTAMP_FMT)
            .map_err(|e| data_err("plot-data", format!("bad timestamp `{ts}`: {e}")))?;
        if parsed.month() == month {
            out.push_str(line);
            out.push('\n');
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(PipelineError::NoSuchMonth {
            station: station.to_string(),
            month,
        });
    }
    let path = manifest
        .config
        .output_dir
        .join(station)
        .join(format!("plot_data_{month:02}.csv"));
    write_file(&path, &out)?;
    Ok(path)
}
