//! Versioned JSON persistence for trained regressors. Floats survive a
//! save/load round trip bit-exactly (shortest-roundtrip printing), so a
//! reloaded model predicts identically to the one in memory.

use crate::error::{CoreError, Result};
use crate::forest::ForestModel;
use crate::ridge::RidgeModel;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorModel {
    Forest(ForestModel),
    Ridge(RidgeModel),
}

impl RegressorModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        match self {
            RegressorModel::Forest(m) => m.predict(features),
            RegressorModel::Ridge(m) => m.predict(features),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RegressorModel::Forest(_) => "forest",
            RegressorModel::Ridge(_) => "ridge",
        }
    }

    pub fn target_tag(&self) -> &'static str {
        match self {
            RegressorModel::Forest(m) => m.target.tag(),
            RegressorModel::Ridge(m) => m.target.tag(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: RegressorModel,
}

pub fn save_model(path: &Path, model: &RegressorModel) -> Result<()> {
    let file = File::create(path)?;
    let envelope = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    serde_json::to_writer(BufWriter::new(file), &envelope)
        .map_err(|e| CoreError::DomainError(format!("model serialization failed: {e}")))
}

pub fn load_model(path: &Path) -> Result<RegressorModel> {
    let file = File::open(path)?;
    let envelope: ModelFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CoreError::DomainError(format!("model file unreadable: {e}")))?;
    if envelope.format_version != MODEL_FORMAT_VERSION {
        return Err(CoreError::DomainError(format!(
            "model format version {} unsupported (expected {MODEL_FORMAT_VERSION})",
            envelope.format_version
        )));
    }
    Ok(envelope.model)
}
