//! Trainable predictors: ordinary least-squares linear regression and
//! gradient-boosted regression trees, plus versioned JSON persistence.

mod gbdt;
mod linear;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gbdt::{
    fit_gbdt, four_xgb_presets, predict_gbdt, BoostedEnsemble, GbdtConfig, GbdtPreset, Node,
    RegressionTree,
};
pub use linear::{fit_linear, predict_linear, LinearModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("need at least {needed} rows, found {found}")]
    InsufficientRows { needed: usize, found: usize },
    #[error("model was trained on columns {expected:?}, input has {found:?}")]
    FeatureMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unsupported model file: {0}")]
    BadModelFile(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) const MODEL_FORMAT: &str = "ghicast-model";
pub(crate) const MODEL_VERSION: u32 = 1;

/// A trained model of either kind, as persisted to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelArtifact {
    Linear(LinearModel),
    Gbdt(BoostedEnsemble),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: ModelArtifact,
}

/// Serialize a model to a versioned JSON document.
pub fn model_to_json(model: &ModelArtifact) -> Result<String, ModelError> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        model: model.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn model_from_json(text: &str) -> Result<ModelArtifact, ModelError> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format != MODEL_FORMAT {
        return Err(ModelError::BadModelFile(format!(
            "format `{}` is not `{MODEL_FORMAT}`",
            file.format
        )));
    }
    if file.version != MODEL_VERSION {
        return Err(ModelError::BadModelFile(format!(
            "version {} is not {MODEL_VERSION}",
            file.version
        )));
    }
    Ok(file.model)
}

pub fn save_model(path: &Path, model: &ModelArtifact) -> Result<(), ModelError> {
    std::fs::write(path, model_to_json(model)?).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ModelArtifact, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_json(&text)
}

impl ModelArtifact {
    /// Predict with whichever model kind this is.
    pub fn predict(&self, frame: &crate::frame::Frame) -> Result<Vec<f64>, ModelError> {
        match self {
            ModelArtifact::Linear(m) => predict_linear(m, frame),
            ModelArtifact::Gbdt(m) => predict_gbdt(m, frame),
        }
    }
}
