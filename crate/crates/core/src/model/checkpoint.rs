//! Checkpoint container `mrn-ckpt/1`: JSON with parameters stored as
//! base64 of little-endian f64 bytes.

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::ModelConfig;
use super::params::{inventory, ParamStore};
use super::Model;
use crate::graph::Vocabulary;
use crate::tensor::Tensor;

pub const CHECKPOINT_FORMAT: &str = "mrn-ckpt/1";
const FORMAT_FAMILY: &str = "mrn-ckpt/";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error("unsupported checkpoint version {found:?} (expected {CHECKPOINT_FORMAT:?})")]
    Version { found: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    /// Epoch (1-based) the parameters come from; 0 when untrained.
    pub epoch: usize,
    pub best_validation_f1: Option<f64>,
    pub class: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelCheckpoint {
    pub model: Model,
    pub metadata: TrainingMetadata,
}

#[derive(Serialize, Deserialize)]
struct StoredParam {
    name: String,
    shape: Vec<usize>,
    data: String,
}

#[derive(Serialize, Deserialize)]
struct Stored {
    format: String,
    config: ModelConfig,
    vocabulary: Vocabulary,
    params: Vec<StoredParam>,
    metadata: TrainingMetadata,
}

fn encode(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode(text: &str, name: &str) -> Result<Vec<f64>, CheckpointError> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| CheckpointError::Format(format!("parameter {name}: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(CheckpointError::Format(format!("parameter {name}: truncated data")));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

impl ModelCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let model = &self.model;
        let stored = Stored {
            format: CHECKPOINT_FORMAT.into(),
            config: model.config.clone(),
            vocabulary: model.vocab.clone(),
            params: model
                .params
                .names()
                .iter()
                .zip(model.params.tensors())
                .map(|(name, t)| StoredParam {
                    name: name.clone(),
                    shape: t.shape().to_vec(),
                    data: encode(t.data()),
                })
                .collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_vec(&stored).expect("checkpoint serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ModelCheckpoint, CheckpointError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| CheckpointError::Format(e.to_string()))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(CHECKPOINT_FORMAT) => {}
            Some(other) if other.starts_with(FORMAT_FAMILY) => {
                return Err(CheckpointError::Version { found: other.into() })
            }
            Some(other) => return Err(CheckpointError::Format(format!("unknown format tag {other:?}"))),
            None => return Err(CheckpointError::Format("missing format tag".into())),
        }
        let stored: Stored = serde_json::from_value(value).map_err(|e| CheckpointError::Format(e.to_string()))?;
        stored
            .config
            .validate()
            .map_err(|e| CheckpointError::Format(e.to_string()))?;
        let expected = inventory(&stored.config, stored.vocabulary.node_count(), stored.vocabulary.edge_count());
        if expected.len() != stored.params.len() {
            return Err(CheckpointError::Format(format!(
                "expected {} parameters, found {}",
                expected.len(),
                stored.params.len()
            )));
        }
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for ((name, shape, _), p) in expected.into_iter().zip(stored.params) {
            if p.name != name || p.shape != shape {
                return Err(CheckpointError::Format(format!(
                    "parameter {} {:?} does not match expected {name} {shape:?}",
                    p.name, p.shape
                )));
            }
            let data = decode(&p.data, &name)?;
            let t = Tensor::new(shape, data).map_err(|e| CheckpointError::Format(format!("parameter {name}: {e}")))?;
            names.push(name);
            tensors.push(t);
        }
        Ok(ModelCheckpoint {
            model: Model {
                config: stored.config,
                vocab: stored.vocabulary,
                params: ParamStore::from_parts(names, tensors),
            },
            metadata: stored.metadata,
        })
    }
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint, CheckpointError> {
    ModelCheckpoint::from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, SourceFile};
    use crate::graph::{build_mrng, build_vocabulary};

    fn checkpoint() -> (ModelCheckpoint, crate::graph::Mrng) {
        let g = build_mrng(
            "t.sol",
            &parse_source(&SourceFile::new("t.sol", "contract C { function f(uint a) { a -= 1; } }")).unwrap(),
        );
        let config = ModelConfig {
            f_hidden: 8,
            p: 2,
            layers: 2,
            heads: 2,
            k_prime: 3,
            c0: 6,
            ..ModelConfig::default()
        };
        let model = Model::new(config, build_vocabulary([&g], 1).unwrap()).unwrap();
        (
            ModelCheckpoint {
                model,
                metadata: TrainingMetadata::default(),
            },
            g,
        )
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (ckpt, g) = checkpoint();
        let back = ModelCheckpoint::from_bytes(&ckpt.to_bytes()).unwrap();
        assert_eq!(back, ckpt);
        let a = ckpt.model.predict(&g).unwrap();
        let b = back.model.predict(&g).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_input() {
        let (ckpt, _) = checkpoint();
        let bytes = ckpt.to_bytes();
        assert!(matches!(
            ModelCheckpoint::from_bytes(&bytes[..bytes.len() - 10]),
            Err(CheckpointError::Format(_))
        ));
        let text = String::from_utf8(bytes).unwrap().replace(CHECKPOINT_FORMAT, "mrn-ckpt/999");
        assert!(matches!(
            ModelCheckpoint::from_bytes(text.as_bytes()),
            Err(CheckpointError::Version { found }) if found == "mrn-ckpt/999"
        ));
    }
}
