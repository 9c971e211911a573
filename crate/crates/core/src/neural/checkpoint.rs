//! Checkpoint directory layout:
//!
//! ```text
//! manifest.json      {"version": 1, "dtype": "f64", "max_len": 64, "shapes": {"<tensor>": [dims...]}}
//! vocab.txt          one token per line; line 0 is [PAD], line 1 is [UNK]
//! <tensor>.bin       raw little-endian f64 values, row-major
//! ```
//!
//! `token_embedding`, `dense_weight` and `dense_bias` are required. A checkpoint
//! without `head_weight` / `head_bias` is an encoder only; its head starts at
//! zero (so every score starts at 0.5) and is learned during fine-tuning.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::model::{NeuralClassifier, Parameters, Tensor};
use super::vocab::Vocab;
use super::NeuralError;

pub const CHECKPOINT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.json";
const VOCAB: &str = "vocab.txt";
const DTYPE: &str = "f64";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub version: u32,
    pub dtype: String,
    pub max_len: usize,
    pub shapes: BTreeMap<String, Vec<usize>>,
}

impl CheckpointManifest {
    /// Parses and checks version, dtype and tensor names (not file contents).
    pub fn parse(input: &str) -> Result<Self, String> {
        let m: CheckpointManifest = serde_json::from_str(input).map_err(|e| format!("manifest: {e}"))?;
        if m.version != CHECKPOINT_VERSION {
            return Err(format!("unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})", m.version));
        }
        if m.dtype != DTYPE {
            return Err(format!("unsupported dtype {:?} (expected {DTYPE:?})", m.dtype));
        }
        if m.max_len == 0 {
            return Err("max_len must be positive".into());
        }
        for name in m.shapes.keys() {
            if !Parameters::NAMES.contains(&name.as_str()) {
                return Err(format!("unknown tensor {name:?}"));
            }
        }
        for required in ["token_embedding", "dense_weight", "dense_bias"] {
            if !m.shapes.contains_key(required) {
                return Err(format!("missing tensor {required:?}"));
            }
        }
        for (name, shape) in &m.shapes {
            if shape.is_empty() || shape.iter().any(|&d| d == 0) {
                return Err(format!("tensor {name:?} has degenerate shape {shape:?}"));
            }
            if shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).is_none_or(|n| n > (1 << 31)) {
                return Err(format!("tensor {name:?} is too large"));
            }
        }
        Ok(m)
    }
}

fn ck_err(path: &Path, reason: impl Into<String>) -> NeuralError {
    NeuralError::CheckpointError { path: path.to_path_buf(), reason: reason.into() }
}

fn tensor_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.bin"))
}

/// Writes `model` as a checkpoint directory at `dir`.
pub fn save_checkpoint(model: &NeuralClassifier, dir: &Path) -> Result<(), NeuralError> {
    fs::create_dir_all(dir).map_err(|e| ck_err(dir, e.to_string()))?;
    let mut shapes = BTreeMap::new();
    for (name, t) in model.params.named() {
        shapes.insert(name.to_string(), t.shape.clone());
        let bytes: Vec<u8> = t.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        let path = tensor_file(dir, name);
        fs::write(&path, bytes).map_err(|e| ck_err(&path, e.to_string()))?;
    }
    let manifest = CheckpointManifest { version: CHECKPOINT_VERSION, dtype: DTYPE.into(), max_len: model.max_len, shapes };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| ck_err(&path, e.to_string()))?;
    let path = dir.join(VOCAB);
    fs::write(&path, model.vocab.to_file_string()).map_err(|e| ck_err(&path, e.to_string()))
}

fn read_tensor(dir: &Path, name: &str, shape: &[usize]) -> Result<Tensor, NeuralError> {
    let path = tensor_file(dir, name);
    let bytes = fs::read(&path).map_err(|e| ck_err(&path, e.to_string()))?;
    let n: usize = shape.iter().product();
    if bytes.len() != n * 8 {
        return Err(ck_err(&path, format!("expected {} bytes for shape {shape:?}, found {}", n * 8, bytes.len())));
    }
    let data: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(ck_err(&path, "non-finite weight"));
    }
    Tensor::new(shape, data).map_err(|e| ck_err(&path, e.to_string()))
}

/// Loads a checkpoint directory (or its `manifest.json`) as a classifier.
pub fn load_external_checkpoint(path: &Path) -> Result<NeuralClassifier, NeuralError> {
    let dir = if path.file_name().is_some_and(|n| n == MANIFEST) {
        path.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        path.to_path_buf()
    };
    let manifest_path = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(|e| ck_err(&manifest_path, e.to_string()))?;
    let manifest = CheckpointManifest::parse(&text).map_err(|e| ck_err(&manifest_path, e))?;
    let vocab_path = dir.join(VOCAB);
    let vocab_text = fs::read_to_string(&vocab_path).map_err(|e| ck_err(&vocab_path, e.to_string()))?;
    let vocab = Vocab::parse(&vocab_text).map_err(|e| ck_err(&vocab_path, e.to_string()))?;

    let load = |name: &str| read_tensor(&dir, name, &manifest.shapes[name]);
    let token_embedding = load("token_embedding")?;
    let dense_weight = load("dense_weight")?;
    let dense_bias = load("dense_bias")?;
    let hidden = dense_weight.shape[0];
    let head_weight = match manifest.shapes.contains_key("head_weight") {
        true => load("head_weight")?,
        false => Tensor::zeros(&[hidden]),
    };
    let head_bias = match manifest.shapes.contains_key("head_bias") {
        true => load("head_bias")?,
        false => Tensor::zeros(&[1]),
    };
    let params = Parameters { token_embedding, dense_weight, dense_bias, head_weight, head_bias };
    NeuralClassifier::from_parts(vocab, manifest.max_len, params).map_err(|e| ck_err(&manifest_path, e.to_string()))
}
