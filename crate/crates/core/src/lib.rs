//! Next-minute GHI forecasting from SURFRAD ground-station records.
//!
//! The toolkit parses minute-resolution station archives, cleans them and
//! restricts them to the daytime window, frames a next-minute global
//! horizontal irradiance prediction task, ranks features with a random
//! forest, and trains and compares three predictors: linear regression,
//! gradient-boosted regression trees, and a GBDT whose hyperparameters are
//! tuned by a genetic algorithm. The [`pipeline`] module drives the whole
//! flow and writes comparison reports; the `ghicast` binary exposes it on
//! the command line.

pub mod features;
pub mod fetch;
pub mod frame;
pub mod ga;
pub mod ingest;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod synth;

pub use frame::Frame;
pub use ingest::{Observation, StationDataset, StationMeta};
pub use metrics::{ComparisonTable, MetricsReport};
pub use models::{BoostedEnsemble, GbdtConfig, LinearModel};
pub use pipeline::{RunConfig, RunManifest};
