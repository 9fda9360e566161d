//! Versioned JSON persistence for trained VAE-NMF models.
//!
//! Layout (version 1):
//!
//! ```text
//! {
//!   "format": "gammadict-vae-nmf",
//!   "version": 1,
//!   "input_dim": m, "rank": r, "hidden": [h1, h2], "prior_alpha": α₀,
//!   "encoder": {
//!     "layer1_weights": {"rows": h1, "cols": m, "data": [...]},
//!     "layer1_bias": [...],
//!     "layer2_weights": {...}, "layer2_bias": [...],
//!     "alpha_head_weights": {...}, "alpha_head_bias": [...]
//!   },
//!   "decoder": {"w": {"rows": m, "cols": r, "data": [...]}},
//!   "train_config": {...} | null
//! }
//! ```
//!
//! Matrices are row-major. Floats are written in shortest round-trip form
//! and parsed exactly, so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gamma_vae::{DecoderDict, EncoderParams, VaeNmfModel};
use crate::trainer::TrainConfig;

pub const MODEL_FORMAT: &str = "gammadict-vae-nmf";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub input_dim: usize,
    pub rank: usize,
    pub hidden: [usize; 2],
    pub prior_alpha: f64,
    pub encoder: EncoderParams,
    pub decoder: DecoderDict,
    pub train_config: Option<TrainConfig>,
}

impl ModelFile {
    pub fn new(model: &VaeNmfModel, train_config: Option<&TrainConfig>) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            input_dim: model.input_dim,
            rank: model.rank,
            hidden: model.hidden,
            prior_alpha: model.prior_alpha,
            encoder: model.encoder.clone(),
            decoder: model.decoder.clone(),
            train_config: train_config.cloned(),
        }
    }

    pub fn into_model(self) -> Result<(VaeNmfModel, Option<TrainConfig>)> {
        let model = VaeNmfModel {
            encoder: self.encoder,
            decoder: self.decoder,
            prior_alpha: self.prior_alpha,
            input_dim: self.input_dim,
            rank: self.rank,
            hidden: self.hidden,
        };
        model.validate()?;
        Ok((model, self.train_config))
    }
}

pub fn model_to_json(model: &VaeNmfModel, train_config: Option<&TrainConfig>) -> String {
    let mut text = serde_json::to_string_pretty(&ModelFile::new(model, train_config))
        .expect("model serializes");
    text.push('\n');
    text
}

pub fn model_from_json(text: &str) -> Result<(VaeNmfModel, Option<TrainConfig>)> {
    let schema = |field: &str, msg: String| Error::Schema {
        field: field.to_string(),
        msg,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| schema("<document>", e.to_string()))?;
    let format = value
        .get("format")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("format", "missing or not a string".into()))?;
    if format != MODEL_FORMAT {
        return Err(schema("format", format!("expected {MODEL_FORMAT:?}, found {format:?}")));
    }
    let version = value
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema("version", "missing or not an unsigned integer".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(Error::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            supported: MODEL_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("<document>")
            .to_string();
        Error::Schema { field, msg }
    })?;
    file.into_model()
}

pub fn save_model(path: impl AsRef<Path>, model: &VaeNmfModel, train_config: Option<&TrainConfig>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model, train_config)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(VaeNmfModel, Option<TrainConfig>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
