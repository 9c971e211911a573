//! Saved models.
//!
//! A model directory holds `model.json`. Boosted models keep their ensemble
//! inline; neural models keep weights in a `checkpoint/` subdirectory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ClassifierKind, EmbeddingProviderKind};
use super::{RunError, Stage};
use crate::boosted::{predict_proba, TreeEnsemble};
use crate::corpus::{LabelMap, Task};
use crate::embeddings::{load_precomputed, EmbeddingMatrix, HashingEmbedder};
use crate::neural::{load_external_checkpoint, save_checkpoint, NeuralClassifier};

pub const ARTIFACT_VERSION: u32 = 1;
const MODEL_FILE: &str = "model.json";
const CHECKPOINT_DIR: &str = "checkpoint";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Boosted,
    Neural,
}

/// How a boosted model turns text into features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub provider: EmbeddingProviderKind,
    pub dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub classifier: ClassifierKind,
    pub task: Task,
    pub positive_label: String,
    pub negative_label: String,
    pub threshold: f64,
    pub config_hash: String,
}

impl ModelInfo {
    pub fn label_map(&self) -> LabelMap {
        LabelMap::new(self.positive_label.clone(), self.negative_label.clone())
    }
}

/// On-disk form of `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCard {
    pub version: u32,
    pub kind: ModelKind,
    pub classifier: ClassifierKind,
    pub task: Task,
    pub positive_label: String,
    pub negative_label: String,
    pub threshold: f64,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<TreeEnsemble>,
}

impl ModelCard {
    /// Parses and cross-checks a `model.json` document.
    pub fn parse(input: &str) -> Result<Self, String> {
        let card: ModelCard = serde_json::from_str(input).map_err(|e| format!("model.json: {e}"))?;
        if card.version != ARTIFACT_VERSION {
            return Err(format!("unsupported model version {} (expected {ARTIFACT_VERSION})", card.version));
        }
        if card.positive_label.is_empty() || card.negative_label.is_empty() || card.positive_label == card.negative_label {
            return Err("label names must be non-empty and distinct".into());
        }
        if !(card.threshold > 0.0 && card.threshold < 1.0) {
            return Err(format!("threshold {} outside (0, 1)", card.threshold));
        }
        if card.classifier.is_boosted() != (card.kind == ModelKind::Boosted) {
            return Err(format!("classifier {} does not match kind {:?}", card.classifier, card.kind));
        }
        match (card.kind, &card.embedding, &card.ensemble) {
            (ModelKind::Boosted, Some(spec), Some(ensemble)) => {
                ensemble.validate().map_err(|e| e.to_string())?;
                if ensemble.feature_dim != spec.dim {
                    return Err(format!("ensemble expects {} features, embedding has {}", ensemble.feature_dim, spec.dim));
                }
                if spec.provider == EmbeddingProviderKind::Hashing && spec.dim < 2 {
                    return Err("hashing dimension must be at least 2".into());
                }
            }
            (ModelKind::Boosted, _, _) => return Err("boosted model needs embedding and ensemble".into()),
            (ModelKind::Neural, None, None) => {}
            (ModelKind::Neural, _, _) => return Err("neural model must not carry embedding or ensemble".into()),
        }
        Ok(card)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Boosted { ensemble: TreeEnsemble, embedding: EmbeddingSpec },
    Neural(NeuralClassifier),
}

/// A trained model plus what is needed to apply it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub info: ModelInfo,
    pub predictor: Predictor,
}

fn model_dir(path: &Path) -> PathBuf {
    if path.file_name().is_some_and(|n| n == MODEL_FILE) {
        path.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        path.to_path_buf()
    }
}

impl ModelArtifact {
    pub fn card(&self) -> ModelCard {
        let (kind, embedding, ensemble) = match &self.predictor {
            Predictor::Boosted { ensemble, embedding } => (ModelKind::Boosted, Some(*embedding), Some(ensemble.clone())),
            Predictor::Neural(_) => (ModelKind::Neural, None, None),
        };
        ModelCard {
            version: ARTIFACT_VERSION,
            kind,
            classifier: self.info.classifier,
            task: self.info.task,
            positive_label: self.info.positive_label.clone(),
            negative_label: self.info.negative_label.clone(),
            threshold: self.info.threshold,
            config_hash: self.info.config_hash.clone(),
            embedding,
            ensemble,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<(), RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::at(Stage::Write, format!("{}: {e}", dir.display())))?;
        if let Predictor::Neural(model) = &self.predictor {
            save_checkpoint(model, &dir.join(CHECKPOINT_DIR)).map_err(|e| RunError::at(Stage::Write, e))?;
        }
        let json = serde_json::to_string_pretty(&self.card()).expect("model card serializes");
        let path = dir.join(MODEL_FILE);
        fs::write(&path, json).map_err(|e| RunError::at(Stage::Write, format!("{}: {e}", path.display())))
    }

    /// Loads a model directory or its `model.json`.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let dir = model_dir(path);
        let file = dir.join(MODEL_FILE);
        let text =
            fs::read_to_string(&file).map_err(|e| RunError::at(Stage::Load, format!("{}: {e}", file.display())))?;
        let card = ModelCard::parse(&text).map_err(|e| RunError::at(Stage::Load, format!("{}: {e}", file.display())))?;
        let info = ModelInfo {
            classifier: card.classifier,
            task: card.task,
            positive_label: card.positive_label,
            negative_label: card.negative_label,
            threshold: card.threshold,
            config_hash: card.config_hash,
        };
        let predictor = match (card.kind, card.ensemble, card.embedding) {
            (ModelKind::Boosted, Some(ensemble), Some(embedding)) => Predictor::Boosted { ensemble, embedding },
            (ModelKind::Neural, _, _) => Predictor::Neural(
                load_external_checkpoint(&dir.join(CHECKPOINT_DIR)).map_err(|e| RunError::at(Stage::Load, e))?,
            ),
            _ => unreachable!("ModelCard::parse checks kind consistency"),
        };
        Ok(ModelArtifact { info, predictor })
    }

    /// Positive-class probabilities for `(id, text)` pairs. Boosted models
    /// using precomputed vectors need `vectors` covering every id.
    pub fn score(&self, ids: &[String], texts: &[&str], vectors: Option<&Path>) -> Result<Vec<f64>, RunError> {
        match &self.predictor {
            Predictor::Neural(model) => {
                model.predict_texts(texts.iter().copied()).map_err(|e| RunError::at(Stage::Evaluate, e))
            }
            Predictor::Boosted { ensemble, embedding } => {
                let x = features(embedding, ids, texts, vectors)?;
                predict_proba(ensemble, &x).map_err(|e| RunError::at(Stage::Evaluate, e))
            }
        }
    }
}

/// Feature matrix for the given examples under `spec`.
pub(crate) fn features(
    spec: &EmbeddingSpec,
    ids: &[String],
    texts: &[&str],
    vectors: Option<&Path>,
) -> Result<EmbeddingMatrix, RunError> {
    let embed_err = |e: crate::embeddings::EmbeddingError| RunError::at(Stage::Embed, e);
    let x = match spec.provider {
        EmbeddingProviderKind::Hashing => {
            let h = HashingEmbedder::new(spec.dim, spec.seed).map_err(embed_err)?;
            let rows: Vec<Vec<f64>> = texts.iter().map(|t| h.embed_text(t)).collect();
            EmbeddingMatrix::from_rows(ids.to_vec(), &rows, spec.dim, format!("hashing(dim={},seed={})", spec.dim, spec.seed))
                .map_err(embed_err)?
        }
        EmbeddingProviderKind::Precomputed => {
            let path = vectors
                .ok_or_else(|| RunError::at(Stage::Embed, "model uses precomputed vectors; supply a vector file"))?;
            load_precomputed(path, ids).map_err(embed_err)?
        }
    };
    if x.n_rows() > 0 && x.dim() != spec.dim {
        return Err(RunError::at(Stage::Embed, format!("vectors have dimension {}, expected {}", x.dim(), spec.dim)));
    }
    Ok(x)
}
