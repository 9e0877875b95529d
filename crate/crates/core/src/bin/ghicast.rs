//! Command-line front end: `run`, `fetch`, `stats`, `plot-data`, and
//! `gen-synthetic` subcommands over the forecasting pipeline.
//!
//! Configuration precedence for `run`: command-line flags beat the
//! `GHICAST_CACHE_ROOT` environment variable (data root only), which beats
//! the JSON config file, which beats built-in defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ghicast_core::ingest::{station_by_id, StationInfo};
use ghicast_core::pipeline::{
    self, ModelKind, PipelineError, RunConfig, RunManifest, SplitStrategy,
};
use ghicast_core::preprocess::{clean, daytime_filter, summary_stats};
use ghicast_core::{fetch, ingest, synth};

const CACHE_ENV: &str = "GHICAST_CACHE_ROOT";

#[derive(Parser)]
#[command(name = "ghicast", version, about = "Next-minute GHI forecasting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: load, preprocess, select features, train, evaluate,
    /// and write reports.
    Run(RunArgs),
    /// Download daily archive files into the local cache.
    Fetch(FetchArgs),
    /// Print summary statistics for a station's cleaned daytime data.
    Stats(StatsArgs),
    /// Extract one month of persisted validation predictions for plotting.
    PlotData(PlotDataArgs),
    /// Write a deterministic synthetic three-station archive.
    GenSynthetic(GenSyntheticArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated station ids (bondville, desertrock, pennstate).
    #[arg(long, value_delimiter = ',')]
    stations: Option<Vec<String>>,
    /// Comma-separated training years.
    #[arg(long, value_delimiter = ',')]
    train_years: Option<Vec<i32>>,
    #[arg(long)]
    validation_year: Option<i32>,
    /// Comma-separated model kinds: lr, xgb, ga.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long)]
    xgb_preset: Option<String>,
    #[arg(long)]
    ga_generations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_features: Option<usize>,
    /// Data/cache root (also settable via GHICAST_CACHE_ROOT).
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Never touch the network; fail if local data is missing.
    #[arg(long)]
    offline: bool,
    /// Output directory for reports, models, and the manifest.
    #[arg(long = "out")]
    output_dir: Option<PathBuf>,
    /// Split strategy: random or chronological.
    #[arg(long)]
    split: Option<String>,
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec!["bondville".to_string(), "desertrock".to_string(), "pennstate".to_string()])]
    stations: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2018, 2019, 2020])]
    years: Vec<i32>,
    /// Cache root (flag beats GHICAST_CACHE_ROOT beats `data`).
    #[arg(long)]
    cache_root: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    station: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2018, 2019])]
    years: Vec<i32>,
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    offline: bool,
}

#[derive(Args)]
struct PlotDataArgs {
    /// Output directory of a completed run (holds manifest.json).
    #[arg(long)]
    run_dir: PathBuf,
    #[arg(long)]
    station: String,
    /// Month number (1-12) or English name.
    #[arg(long)]
    month: String,
}

#[derive(Args)]
struct GenSyntheticArgs {
    #[arg(long = "out")]
    out: PathBuf,
    /// Days generated per station per year.
    #[arg(long, default_value_t = 10)]
    days: u32,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2018, 2019, 2020])]
    years: Vec<i32>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0.02)]
    sentinel_rate: f64,
}

fn env_cache_root() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

fn resolve_stations(ids: &[String]) -> Result<Vec<&'static StationInfo>, PipelineError> {
    ids.iter()
        .map(|id| {
            station_by_id(id)
                .ok_or_else(|| PipelineError::Config(format!("unknown station `{id}`")))
        })
        .collect()
}

fn parse_month(s: &str) -> Result<u32, PipelineError> {
    if let Ok(n) = s.parse::<u32>() {
        return Ok(n);
    }
    const NAMES: [&str; 12] = [
        "january", "february", "march", "april", "may", "june", "july", "august", "september",
        "october", "november", "december",
    ];
    let low = s.to_ascii_lowercase();
    NAMES
        .iter()
        .position(|n| n.starts_with(&low) && low.len() >= 3)
        .map(|i| i as u32 + 1)
        .ok_or_else(|| PipelineError::Config(format!("unrecognized month `{s}`")))
}

fn build_run_config(args: &RunArgs) -> Result<RunConfig, PipelineError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str(&text)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };

    if let Some(v) = &args.stations {
        cfg.stations = v.clone();
    }
    if let Some(v) = &args.train_years {
        cfg.train_years = v.clone();
    }
    if let Some(v) = args.validation_year {
        cfg.validation_year = v;
    }
    if let Some(models) = &args.models {
        cfg.models = models
            .iter()
            .map(|m| {
                ModelKind::parse(m)
                    .ok_or_else(|| PipelineError::Config(format!("unknown model `{m}`")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = &args.xgb_preset {
        cfg.xgb_preset = v.clone();
    }
    if let Some(v) = args.ga_generations {
        cfg.ga_generations = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.k_features {
        cfg.k_features = v;
    }
    match (&args.data_root, env_cache_root()) {
        (Some(v), _) => cfg.data_root = v.clone(),
        (None, Some(env)) => cfg.data_root = env,
        (None, None) => {}
    }
    if args.offline {
        cfg.offline = true;
    }
    if let Some(v) = &args.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = &args.split {
        cfg.split = match v.to_ascii_lowercase().as_str() {
            "random" => SplitStrategy::Random,
            "chronological" => SplitStrategy::Chronological,
            other => {
                return Err(PipelineError::Config(format!(
                    "unknown split strategy `{other}`"
                )))
            }
        };
    }
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<i32, PipelineError> {
    let cfg = build_run_config(args)?;
    let out = pipeline::run_with_observer(&cfg, &mut pipeline::NoopObserver)?;
    print!("{}", out.table.render_text());
    println!("metrics: {}", out.manifest.metrics_csv.display());
    println!(
        "manifest: {}",
        cfg.output_dir.join("manifest.json").display()
    );
    for (id, srun) in &out.manifest.stations {
        if srun.status != "ok" {
            eprintln!("{id}: {}", srun.status);
        }
    }
    Ok(out.manifest.failure_exit_code().unwrap_or(0))
}

fn cmd_fetch(args: &FetchArgs) -> Result<i32, PipelineError> {
    let stations = resolve_stations(&args.stations)?;
    let root = args
        .cache_root
        .clone()
        .or_else(env_cache_root)
        .unwrap_or_else(|| PathBuf::from("data"));
    let report = fetch::fetch(&stations, &args.years, &root)
        .map_err(|e| PipelineError::Data {
            stage: "fetch".to_string(),
            message: e.to_string(),
        })?;
    println!(
        "downloaded {}, skipped {} (cached), failed {}",
        report.downloaded.len(),
        report.skipped.len(),
        report.failed.len()
    );
    for (url, msg) in report.failed.iter().take(10) {
        eprintln!("failed: {url}: {msg}");
    }
    if report.failed.len() > 10 {
        eprintln!("... and {} more", report.failed.len() - 10);
    }
    Ok(if report.downloaded.is_empty() && report.skipped.is_empty() {
        3
    } else {
        0
    })
}

fn cmd_stats(args: &StatsArgs) -> Result<i32, PipelineError> {
    let info = station_by_id(&args.station)
        .ok_or_else(|| PipelineError::Config(format!("unknown station `{}`", args.station)))?;
    let root = args
        .data_root
        .clone()
        .or_else(env_cache_root)
        .unwrap_or_else(|| PathBuf::from("data"));
    let data_err = |e: ingest::IngestError| PipelineError::Data {
        stage: "stats".to_string(),
        message: e.to_string(),
    };
    let ds = match ingest::load_station(&root, info, &args.years) {
        Ok(ds) => ds,
        Err(ingest::IngestError::MissingData { .. }) if !args.offline => {
            fetch::fetch(&[info], &args.years, &root).map_err(|e| PipelineError::Data {
                stage: "stats".to_string(),
                message: e.to_string(),
            })?;
            ingest::load_station(&root, info, &args.years).map_err(data_err)?
        }
        Err(e) => return Err(data_err(e)),
    };
    let cleaned = clean(&ds).map_err(|e| PipelineError::Data {
        stage: "stats".to_string(),
        message: e.to_string(),
    })?;
    let stats = summary_stats(&daytime_filter(&cleaned));
    let csv = stats.to_csv();
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_plot_data(args: &PlotDataArgs) -> Result<i32, PipelineError> {
    let manifest = RunManifest::load(&args.run_dir.join("manifest.json"))?;
    let month = parse_month(&args.month)?;
    let path = pipeline::emit_plot_data(&manifest, &args.station, month)?;
    println!("{}", path.display());
    Ok(0)
}

fn cmd_gen_synthetic(args: &GenSyntheticArgs) -> Result<i32, PipelineError> {
    let written = synth::write_synthetic_archive(
        &args.out,
        args.seed,
        args.days,
        &args.years,
        args.sentinel_rate,
    )
    .map_err(|source| PipelineError::Io {
        path: args.out.clone(),
        source,
    })?;
    println!("wrote {} day files under {}", written.len(), args.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Fetch(args) => cmd_fetch(args),
        Command::Stats(args) => cmd_stats(args),
        Command::PlotData(args) => cmd_plot_data(args),
        Command::GenSynthetic(args) => cmd_gen_synthetic(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
