//! Neural text classifier and its training protocol.
//!
//! The built-in encoder averages token embeddings over non-padding positions
//! and applies one dense `tanh` layer; a linear head and a sigmoid give the
//! positive-class score `s1`. Training minimizes class-weighted binary
//! cross-entropy with bias-corrected adaptive moments and decoupled weight
//! decay, for a fixed number of epochs, returning either the best-validation
//! or the last-epoch checkpoint.

mod checkpoint;
mod loss;
mod model;
mod optim;
mod train;
mod vocab;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{load_external_checkpoint, save_checkpoint, CheckpointManifest, CHECKPOINT_VERSION};
pub use loss::{batch_loss, bce, weighted_bce, PROB_CLAMP};
pub use model::{forward, NeuralClassifier, Parameters, Tensor};
pub use optim::{adamw_update, optimizer_step, AdamState};
pub use train::{select_epoch, train_classifier, EpochRecord, TrainOutcome};
pub use vocab::{tokenize, TokenSequence, Vocab, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};

use crate::corpus::{ClassWeights, Label};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("sequence {0} contains only padding")]
    EmptySequence(usize),
    #[error("non-finite gradient in parameter {0}")]
    NonFiniteGradient(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("best-validation selection needs a validation set")]
    MissingValidation,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("vocabulary: {0}")]
    Vocab(String),
    #[error("checkpoint {path}: {reason}")]
    CheckpointError { path: PathBuf, reason: String },
}

/// Scores for the two classes; `s2` is computed as `1 - s1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityPair {
    pub s1: f64,
    pub s2: f64,
}

impl ProbabilityPair {
    pub fn new(s1: f64) -> Self {
        ProbabilityPair { s1, s2: 1.0 - s1 }
    }
}

/// One-hot ground truth over the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetPair {
    pub t1: u8,
    pub t2: u8,
}

impl From<Label> for TargetPair {
    fn from(l: Label) -> Self {
        let t1 = l.as_u8();
        TargetPair { t1, t2: 1 - t1 }
    }
}

/// Which epoch's parameters `train_classifier` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Highest positive-class validation F1; earliest epoch on ties.
    BestValidation,
    LastEpoch,
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "best_validation" => Ok(Selection::BestValidation),
            "last_epoch" => Ok(Selection::LastEpoch),
            other => Err(format!("unknown selection {other:?} (expected best_validation or last_epoch)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub selection: Selection,
    pub class_weights: ClassWeights,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 2e-5,
            batch_size: 16,
            selection: Selection::LastEpoch,
            class_weights: ClassWeights::UNIFORM,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: String| Err(NeuralError::InvalidConfig(m));
        if self.epochs < 1 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1".into());
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must be in [0, 1), got {b}"));
            }
        }
        if !(self.epsilon > 0.0) || !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("epsilon must be positive and weight_decay non-negative".into());
        }
        let w = self.class_weights;
        if !(w.w_positive > 0.0 && w.w_negative > 0.0 && w.w_positive.is_finite() && w.w_negative.is_finite()) {
            return bad("class weights must be positive and finite".into());
        }
        Ok(())
    }
}
