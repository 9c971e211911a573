use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::artifact::{features, EmbeddingSpec, ModelArtifact, ModelInfo, Predictor};
use super::config::{ClassifierKind, ExperimentConfig};
use super::submission::write_submission;
use super::{RunError, Stage};
use crate::boosted::{predict_proba, train_boosted};
use crate::corpus::{
    class_weights, dataset_stats, load_dataset, stratified_split, Dataset, Label, SplitManifest, Task,
};
use crate::metrics::{self, EvalReport};
use crate::neural::{load_external_checkpoint, train_classifier, EpochRecord, NeuralClassifier, Vocab};

/// Appended to `<output.dir>/results.jsonl` after every successful run.
pub const RESULTS_FILE: &str = "results.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub classifier: ClassifierKind,
    pub task: Task,
    pub f1_positive: f64,
    pub f1_macro: f64,
    pub roc_auc: f64,
    pub seed: u64,
    /// Seconds.
    pub wall_time: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub row: ResultRow,
    pub report: EvalReport,
    pub artifact: ModelArtifact,
    pub test_ids: Vec<String>,
    pub test_scores: Vec<f64>,
    pub test_labels: Vec<Label>,
    /// Neural runs only.
    pub history: Vec<EpochRecord>,
    pub selected_epoch: Option<usize>,
    pub split: Option<SplitManifest>,
}

impl ExperimentOutput {
    pub fn predictions(&self) -> Vec<Label> {
        let t = self.artifact.info.threshold;
        self.test_scores.iter().map(|&s| Label::from(s >= t)).collect()
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    row: &'a ResultRow,
    report: &'a EvalReport,
    history: &'a [EpochRecord],
    selected_epoch: Option<usize>,
    split: Option<&'a SplitManifest>,
}

fn load(cfg: &ExperimentConfig, path: &Path) -> Result<Dataset, RunError> {
    load_dataset(&cfg.resolve_path(path), cfg.data.format, &cfg.data.label_map(), cfg.task)
        .map_err(|e| RunError::at(Stage::Load, e))
}

struct Trained {
    predictor: Predictor,
    test_scores: Vec<f64>,
    history: Vec<EpochRecord>,
    selected_epoch: Option<usize>,
    split: Option<SplitManifest>,
}

fn run_boosted(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<Trained, RunError> {
    let spec = EmbeddingSpec { provider: cfg.embedding.provider, dim: cfg.embedding.dim, seed: cfg.embedding.seed };
    let train_vectors = cfg.embedding.path.as_ref().map(|p| cfg.resolve_path(p));
    let test_vectors = cfg.embedding.test_path.as_ref().map(|p| cfg.resolve_path(p)).or_else(|| train_vectors.clone());
    let matrix_for = |d: &Dataset, vectors: Option<&PathBuf>| {
        let ids: Vec<String> = d.ids().into_iter().map(String::from).collect();
        let texts: Vec<&str> = d.examples().iter().map(|e| e.text.as_str()).collect();
        features(&spec, &ids, &texts, vectors.map(PathBuf::as_path))
    };
    let x_train = matrix_for(train, train_vectors.as_ref())?;
    let x_test = matrix_for(test, test_vectors.as_ref())?;

    let weights = class_weights(dataset_stats(train), cfg.boost_class_weights).map_err(|e| RunError::at(Stage::Weights, e))?;
    let labels = train.labels();
    let per_example: Vec<f64> = labels.iter().map(|&l| weights.of(l)).collect();
    let ensemble =
        train_boosted(&x_train, &labels, Some(&per_example), &cfg.boost).map_err(|e| RunError::at(Stage::Train, e))?;
    let test_scores = predict_proba(&ensemble, &x_test).map_err(|e| RunError::at(Stage::Evaluate, e))?;
    Ok(Trained {
        predictor: Predictor::Boosted { ensemble, embedding: spec },
        test_scores,
        history: Vec::new(),
        selected_epoch: None,
        split: None,
    })
}

fn initial_model(cfg: &ExperimentConfig, train: &Dataset) -> Result<NeuralClassifier, RunError> {
    let n = &cfg.neural;
    if cfg.classifier == ClassifierKind::NeuralCheckpoint {
        match &n.checkpoint {
            Some(p) => {
                let model = load_external_checkpoint(&cfg.resolve_path(p)).map_err(|e| RunError::at(Stage::Load, e))?;
                log::info!("{}: fine-tuning from {}", cfg.name, p.display());
                return Ok(model);
            }
            None => log::warn!("{}: neural.checkpoint is not set; training from scratch instead", cfg.name),
        }
    }
    let vocab = Vocab::build(train.examples().iter().map(|e| e.text.as_str()), n.vocab_size, n.min_count);
    NeuralClassifier::new(vocab, n.max_len, n.embed_dim, n.hidden_dim, n.seed).map_err(|e| RunError::at(Stage::Train, e))
}

fn run_neural(cfg: &ExperimentConfig, full_train: &Dataset, test: &Dataset) -> Result<Trained, RunError> {
    let (train, val, split) = if cfg.split.enabled {
        let (t, v) =
            stratified_split(full_train, cfg.split.fraction, cfg.split.seed).map_err(|e| RunError::at(Stage::Split, e))?;
        let manifest = SplitManifest::describe(&t, &v, cfg.split.fraction, cfg.split.seed);
        (t, Some(v), Some(manifest))
    } else {
        (full_train.clone(), None, None)
    };
    let weights =
        class_weights(dataset_stats(&train), cfg.neural.class_weights).map_err(|e| RunError::at(Stage::Weights, e))?;
    let model = initial_model(cfg, &train)?;
    let outcome = train_classifier(model, &train, val.as_ref(), &cfg.neural.train_config(weights))
        .map_err(|e| RunError::at(Stage::Train, e))?;
    let test_scores = outcome
        .model
        .predict_texts(test.examples().iter().map(|e| e.text.as_str()))
        .map_err(|e| RunError::at(Stage::Evaluate, e))?;
    Ok(Trained {
        predictor: Predictor::Neural(outcome.model),
        test_scores,
        history: outcome.history,
        selected_epoch: Some(outcome.selected_epoch),
        split,
    })
}

/// Loads data, trains and evaluates. Writes nothing.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    cfg.validate_inputs()?;
    let start = Instant::now();
    let train = load(cfg, &cfg.data.train)?;
    let test = load(cfg, &cfg.data.test)?;
    log::info!("{}: {} train / {} test examples ({})", cfg.name, train.len(), test.len(), cfg.task);

    let trained = if cfg.classifier.is_boosted() { run_boosted(cfg, &train, &test)? } else { run_neural(cfg, &train, &test)? };
    let test_labels = test.labels();
    let report =
        metrics::evaluate(&trained.test_scores, &test_labels, cfg.threshold).map_err(|e| RunError::at(Stage::Evaluate, e))?;
    let config_hash = cfg.config_hash();
    let row = ResultRow {
        name: cfg.name.clone(),
        classifier: cfg.classifier,
        task: cfg.task,
        f1_positive: report.f1_positive,
        f1_macro: report.f1_macro,
        roc_auc: report.roc_auc,
        seed: if cfg.classifier.is_boosted() { cfg.boost.seed } else { cfg.neural.seed },
        wall_time: start.elapsed().as_secs_f64(),
        config_hash: config_hash.clone(),
    };
    let artifact = ModelArtifact {
        info: ModelInfo {
            classifier: cfg.classifier,
            task: cfg.task,
            positive_label: cfg.data.positive_label.clone(),
            negative_label: cfg.data.negative_label.clone(),
            threshold: cfg.threshold,
            config_hash,
        },
        predictor: trained.predictor,
    };
    Ok(ExperimentOutput {
        row,
        report,
        artifact,
        test_ids: test.ids().into_iter().map(String::from).collect(),
        test_scores: trained.test_scores,
        test_labels,
        history: trained.history,
        selected_epoch: trained.selected_epoch,
        split: trained.split,
    })
}

fn write_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::at(Stage::Write, format!("{}: {e}", path.display()))
}

/// Appends one JSON line to `path`, creating parent directories.
pub(crate) fn append_jsonl<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| write_err(parent, e))?;
    }
    let mut line = serde_json::to_string(value).expect("row serializes");
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| write_err(path, e))?;
    f.write_all(line.as_bytes()).map_err(|e| write_err(path, e))
}

/// Writes the run directory (model, `report.json`, `submission.csv`) and
/// appends the result row. Returns the run directory.
pub fn persist(cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<PathBuf, RunError> {
    let dir = cfg.run_dir();
    let model_dir = dir.join("model");
    if model_dir.exists() {
        fs::remove_dir_all(&model_dir).map_err(|e| write_err(&model_dir, e))?;
    }
    out.artifact.save(&model_dir)?;
    let report = ReportFile {
        row: &out.row,
        report: &out.report,
        history: &out.history,
        selected_epoch: out.selected_epoch,
        split: out.split.as_ref(),
    };
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&report).expect("report serializes")).map_err(|e| write_err(&path, e))?;
    write_submission(&out.test_ids, &out.predictions(), &dir.join("submission.csv"), &out.artifact.info.label_map())?;
    append_jsonl(&cfg.output_root().join(RESULTS_FILE), &out.row)?;
    Ok(dir)
}

/// [`execute`] followed by [`persist`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let out = execute(cfg)?;
    let dir = persist(cfg, &out)?;
    log::info!(
        "{} / {}: F1 {:.5}  macro-F1 {:.5}  AUC {:.5}  -> {}",
        cfg.name,
        cfg.task,
        out.row.f1_positive,
        out.row.f1_macro,
        out.row.roc_auc,
        dir.display()
    );
    Ok(out)
}
