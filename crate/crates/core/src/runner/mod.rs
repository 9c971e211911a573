//! Experiment orchestration: config resolution, training, evaluation,
//! artifacts, the classifier-by-task matrix and submission files.

mod artifact;
mod config;
mod experiment;
mod matrix;
mod submission;

use std::fmt;

use thiserror::Error;

pub use artifact::{EmbeddingSpec, ModelArtifact, ModelCard, ModelInfo, ModelKind, Predictor, ARTIFACT_VERSION};
pub use config::{
    env_key, key_spec, ClassifierKind, DataConfig, EmbeddingConfig, EmbeddingProviderKind, ExperimentConfig, KeyKind,
    KeySpec, NeuralSettings, SplitConfig, ENV_PREFIX, KEYS,
};
pub use experiment::{execute, persist, run_experiment, ExperimentOutput, ResultRow, RESULTS_FILE};
pub use matrix::{render_leaderboard, run_matrix, FailedRow, MatrixOutcome, MatrixRecord};
pub use submission::{emit_submission, parse_submission, write_submission};

/// Pipeline stage an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Split,
    Weights,
    Embed,
    Train,
    Evaluate,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Split => "split",
            Stage::Weights => "class weights",
            Stage::Embed => "embed",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage} failed: {message}")]
    Stage { stage: Stage, message: String },
}

impl RunError {
    pub fn at(stage: Stage, err: impl fmt::Display) -> Self {
        RunError::Stage { stage, message: err.to_string() }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            RunError::Config(_) => None,
            RunError::Stage { stage, .. } => Some(*stage),
        }
    }

    /// Process exit status: 2 config, 3 data, 4 training, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.stage() {
            None => 2,
            Some(Stage::Load | Stage::Split | Stage::Weights | Stage::Embed | Stage::Evaluate) => 3,
            Some(Stage::Train) => 4,
            Some(Stage::Write) => 1,
        }
    }
}

/// Exit status when a matrix run had at least one failed experiment.
pub const PARTIAL_FAILURE_EXIT: i32 = 5;
