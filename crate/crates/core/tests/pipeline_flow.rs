//! End-to-end pipeline behavior on small synthetic archives: manifests,
//! artifacts, plot-data extraction, and failure handling.

use ghicast_core::metrics::Split;
use ghicast_core::pipeline::{
    emit_plot_data, run, run_with_observer, ModelKind, NoopObserver, PipelineError, RunConfig,
    RunManifest,
};
use ghicast_core::synth::write_synthetic_archive;

fn archive(days_per_year: u32, seed: u64) -> (tempfile::TempDir, std::path::PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("data");
    write_synthetic_archive(&root, seed, days_per_year, &[2018, 2019, 2020], 0.02).unwrap();
    (tmp, root)
}

fn lr_only_config(root: &std::path::Path, out: &std::path::Path) -> RunConfig {
    RunConfig {
        stations: vec!["bondville".to_string()],
        models: vec![ModelKind::Lr],
        data_root: root.to_path_buf(),
        output_dir: out.to_path_buf(),
        offline: true,
        ..RunConfig::default()
    }
}

#[test]
fn minimal_run_writes_one_model_and_two_cells() {
    let (tmp, root) = archive(3, 21);
    let out_dir = tmp.path().join("out");
    let cfg = lr_only_config(&root, &out_dir);
    let out = run_with_observer(&cfg, &mut NoopObserver).unwrap();

    let srun = &out.manifest.stations["bondville"];
    assert_eq!(srun.status, "ok");
    let model_artifacts: Vec<_> = srun
        .artifacts
        .keys()
        .filter(|k| k.starts_with("model:"))
        .collect();
    assert_eq!(model_artifacts, vec!["model:LR"]);

    assert!(out.table.get("bondville", Split::TrainTest, "LR").is_some());
    assert!(out.table.get("bondville", Split::Validation, "LR").is_some());
    assert!(out.table.get("bondville", Split::TrainTest, "XGB-100").is_none());

    // Every artifact referenced by the manifest exists on disk.
    for path in out.manifest.outputs.iter().chain(srun.artifacts.values()) {
        assert!(path.exists(), "missing {}", path.display());
    }

    // Row counts are internally consistent.
    let rc = &srun.row_counts;
    assert_eq!(rc.train + rc.test, rc.samples);
    assert!(rc.cleaned <= rc.loaded);
    assert!(rc.daytime <= rc.cleaned);

    // The saved model reloads and reproduces its predictions.
    let loaded = ghicast_core::models::load_model(&srun.artifacts["model:LR"]).unwrap();
    assert!(matches!(loaded, ghicast_core::models::ModelArtifact::Linear(_)));
}

#[test]
fn manifest_reloads_and_feeds_plot_data() {
    // Five days per year reaches into May (the synthetic calendar starts
    // mid-April), so month extraction has rows to find.
    let (tmp, root) = archive(5, 22);
    let out_dir = tmp.path().join("out");
    run(&lr_only_config(&root, &out_dir)).unwrap();

    let manifest = RunManifest::load(&out_dir.join("manifest.json")).unwrap();
    // Synthetic archives cover mid-April through May.
    let path = emit_plot_data(&manifest, "bondville", 5).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "timestamp,actual,LR");
    let mut rows = 0;
    for line in lines {
        assert!(line.starts_with("2020-05-"), "line outside May: {line}");
        assert_eq!(line.split(',').count(), 3);
        rows += 1;
    }
    assert!(rows > 0);

    match emit_plot_data(&manifest, "bondville", 12) {
        Err(PipelineError::NoSuchMonth { month: 12, .. }) => {}
        other => panic!("expected NoSuchMonth, got {other:?}"),
    }
    match emit_plot_data(&manifest, "nowhere", 5) {
        Err(PipelineError::Config(_)) => {}
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn validation_predictions_have_a_column_per_model() {
    let (tmp, root) = archive(3, 23);
    let out_dir = tmp.path().join("out");
    let cfg = RunConfig {
        models: vec![ModelKind::Lr, ModelKind::Xgb],
        stations: vec!["desertrock".to_string()],
        ..lr_only_config(&root, &out_dir)
    };
    let out = run_with_observer(&cfg, &mut NoopObserver).unwrap();
    let srun = &out.manifest.stations["desertrock"];
    let preds = std::fs::read_to_string(&srun.artifacts["validation_predictions"]).unwrap();
    assert_eq!(preds.lines().next().unwrap(), "timestamp,actual,LR,XGB-100");
}

#[test]
fn missing_station_data_is_marked_not_fatal() {
    let (tmp, root) = archive(3, 24);
    let out_dir = tmp.path().join("out");
    // Remove pennstate's validation year; its station run must fail while
    // the others complete and the manifest still lands.
    std::fs::remove_dir_all(root.join("pennstate").join("2020")).unwrap();
    let cfg = RunConfig {
        stations: vec!["bondville".to_string(), "pennstate".to_string()],
        models: vec![ModelKind::Lr],
        ..lr_only_config(&root, &out_dir)
    };
    let out = run_with_observer(&cfg, &mut NoopObserver).unwrap();
    assert_eq!(out.manifest.stations["bondville"].status, "ok");
    assert!(out.manifest.stations["pennstate"].status.starts_with("failed:"));
    assert_eq!(out.manifest.failure_exit_code(), Some(3));
    assert!(out_dir.join("manifest.json").exists());
    assert!(out.table.get("pennstate", Split::TrainTest, "LR").is_none());
}

#[test]
fn config_validation_rejects_bad_setups() {
    let cfg = RunConfig {
        validation_year: 2018,
        ..RunConfig::default()
    };
    match cfg.validate() {
        Err(e @ PipelineError::Config(_)) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected config error, got {other:?}"),
    }
    let cfg = RunConfig {
        stations: vec!["atlantis".to_string()],
        ..RunConfig::default()
    };
    assert!(cfg.validate().is_err());
    let cfg = RunConfig {
        xgb_preset: "XGB-9000".to_string(),
        ..RunConfig::default()
    };
    assert!(cfg.validate().is_err());
}

#[test]
fn chronological_split_is_supported() {
    let (tmp, root) = archive(3, 25);
    let out_dir = tmp.path().join("out");
    let cfg = RunConfig {
        split: ghicast_core::pipeline::SplitStrategy::Chronological,
        ..lr_only_config(&root, &out_dir)
    };
    let out = run_with_observer(&cfg, &mut NoopObserver).unwrap();
    assert!(out.manifest.all_ok());
}

#[test]
fn run_config_round_trips_through_json() {
    let cfg = RunConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back.stations, cfg.stations);
    assert_eq!(back.seed, cfg.seed);
    // Partial configs pick up defaults.
    let partial: RunConfig = serde_json::from_str(r#"{"seed": 5}"#).unwrap();
    assert_eq!(partial.seed, 5);
    assert_eq!(partial.k_features, 8);
    assert_eq!(partial.train_years, vec![2018, 2019]);
}
