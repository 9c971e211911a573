//! Experiment configuration files.
//!
//! The format is flat `key = value` text with dotted sections (TOML syntax, so
//! `[neural]` / `epochs = 3` and `neural.epochs = 3` are equivalent). Every key
//! must appear in [`KEYS`]; anything else is an error. Relative paths resolve
//! against the directory containing the config file.
//!
//! Environment variables named `ABUSEBENCH_<SECTION>__<KEY>` (for example
//! `ABUSEBENCH_NEURAL__EPOCHS=3`, or `ABUSEBENCH_TASK` for top-level keys)
//! override file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunError;
use crate::boosted::{BoostParams, Growth};
use crate::corpus::{ClassWeights, DataFormat, LabelMap, Task, WeightScheme};
use crate::embeddings::{DEFAULT_HASH_DIM, DEFAULT_PRECOMPUTED_DIM};
use crate::neural::{Selection, TrainConfig};

pub const ENV_PREFIX: &str = "ABUSEBENCH_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Str,
    Path,
    Int,
    Float,
    Bool,
    Choice(&'static [&'static str]),
}

/// One documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: KeyKind,
    pub doc: &'static str,
}

const fn key(key: &'static str, kind: KeyKind, doc: &'static str) -> KeySpec {
    KeySpec { key, kind, doc }
}

const CLASSIFIERS: &[&str] = &["boosted_xgb_like", "boosted_lgbm_like", "neural_scratch", "neural_checkpoint"];

/// The full key registry.
pub const KEYS: &[KeySpec] = &[
    key("name", KeyKind::Str, "row label in leaderboards (default: the classifier)"),
    key("task", KeyKind::Choice(&["abusive", "threatening"]), "subtask; selects protocol defaults (required)"),
    key("classifier", KeyKind::Choice(CLASSIFIERS), "classifier family (required)"),
    key("data.train", KeyKind::Path, "labeled training file (required)"),
    key("data.test", KeyKind::Path, "labeled test file (required)"),
    key("data.format", KeyKind::Choice(&["tsv", "csv"]), "file format (default: from the train file extension)"),
    key("data.positive_label", KeyKind::Str, "label string of the harmful class (default: task class name)"),
    key("data.negative_label", KeyKind::Str, "label string of the other class (default: task class name)"),
    key("split.enabled", KeyKind::Bool, "hold out a validation split (default: true for abusive, false for threatening)"),
    key("split.fraction", KeyKind::Float, "training fraction of the split (default 0.85)"),
    key("split.seed", KeyKind::Int, "split seed (default 13)"),
    key("embedding.provider", KeyKind::Choice(&["hashing", "precomputed"]), "sentence vectors for boosted models (default hashing)"),
    key("embedding.dim", KeyKind::Int, "vector dimension (default 256 hashing, 1024 precomputed)"),
    key("embedding.seed", KeyKind::Int, "hashing seed (default 0)"),
    key("embedding.path", KeyKind::Path, "precomputed vectors covering the training ids"),
    key("embedding.test_path", KeyKind::Path, "precomputed vectors covering the test ids (default: embedding.path)"),
    key("boost.n_rounds", KeyKind::Int, "boosting rounds"),
    key("boost.max_depth", KeyKind::Int, "maximum tree depth"),
    key("boost.learning_rate", KeyKind::Float, "shrinkage applied to every tree"),
    key("boost.lambda", KeyKind::Float, "leaf L2 regularization"),
    key("boost.min_child_hessian", KeyKind::Float, "minimum hessian sum per child"),
    key("boost.gamma", KeyKind::Float, "minimum split gain"),
    key("boost.seed", KeyKind::Int, "recorded seed"),
    key("boost.growth", KeyKind::Choice(&["depth_wise", "leaf_wise"]), "tree growth policy"),
    key("boost.max_leaves", KeyKind::Int, "leaf budget for leaf-wise growth"),
    key("boost.base_score", KeyKind::Float, "initial logit"),
    key("boost.class_weights", KeyKind::Choice(&["uniform", "inverse_frequency"]), "per-example weights (default uniform)"),
    key("neural.epochs", KeyKind::Int, "training epochs (default 10)"),
    key("neural.learning_rate", KeyKind::Float, "initial learning rate (default 2e-5)"),
    key("neural.batch_size", KeyKind::Int, "mini-batch size (default 16)"),
    key("neural.selection", KeyKind::Choice(&["best_validation", "last_epoch"]), "checkpoint selection (default by task)"),
    key("neural.class_weights", KeyKind::Choice(&["uniform", "inverse_frequency"]), "loss weighting (default by task)"),
    key("neural.seed", KeyKind::Int, "initialization and shuffling seed (default 0)"),
    key("neural.beta1", KeyKind::Float, "first moment decay (default 0.9)"),
    key("neural.beta2", KeyKind::Float, "second moment decay (default 0.999)"),
    key("neural.epsilon", KeyKind::Float, "optimizer epsilon (default 1e-8)"),
    key("neural.weight_decay", KeyKind::Float, "decoupled weight decay, not applied to biases (default 0.01)"),
    key("neural.max_len", KeyKind::Int, "tokens per sequence (default 64)"),
    key("neural.embed_dim", KeyKind::Int, "token embedding size (default 32)"),
    key("neural.hidden_dim", KeyKind::Int, "dense layer size (default 32)"),
    key("neural.vocab_size", KeyKind::Int, "vocabulary cap including reserved tokens (default 20000)"),
    key("neural.min_count", KeyKind::Int, "minimum token frequency (default 1)"),
    key("neural.checkpoint", KeyKind::Path, "checkpoint directory to fine-tune from (neural_checkpoint)"),
    key("evaluate.threshold", KeyKind::Float, "decision threshold (default 0.5)"),
    key("output.dir", KeyKind::Path, "where run artifacts and results.jsonl go (default: runs)"),
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    BoostedXgbLike,
    BoostedLgbmLike,
    NeuralScratch,
    NeuralCheckpoint,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::BoostedXgbLike,
        ClassifierKind::BoostedLgbmLike,
        ClassifierKind::NeuralScratch,
        ClassifierKind::NeuralCheckpoint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::BoostedXgbLike => "boosted_xgb_like",
            ClassifierKind::BoostedLgbmLike => "boosted_lgbm_like",
            ClassifierKind::NeuralScratch => "neural_scratch",
            ClassifierKind::NeuralCheckpoint => "neural_checkpoint",
        }
    }

    pub fn is_boosted(self) -> bool {
        matches!(self, ClassifierKind::BoostedXgbLike | ClassifierKind::BoostedLgbmLike)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown classifier {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingProviderKind {
    Hashing,
    Precomputed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub format: DataFormat,
    pub positive_label: String,
    pub negative_label: String,
}

impl DataConfig {
    pub fn label_map(&self) -> LabelMap {
        LabelMap::new(self.positive_label.clone(), self.negative_label.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitConfig {
    pub enabled: bool,
    pub fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingConfig {
    pub provider: EmbeddingProviderKind,
    pub dim: usize,
    pub seed: u64,
    pub path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeuralSettings {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub selection: Selection,
    pub class_weights: WeightScheme,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub max_len: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub vocab_size: usize,
    pub min_count: usize,
    pub checkpoint: Option<PathBuf>,
}

impl NeuralSettings {
    /// Training config with concrete class weights.
    pub fn train_config(&self, class_weights: ClassWeights) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            selection: self.selection,
            class_weights,
            seed: self.seed,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
        }
    }
}

/// A fully resolved experiment: every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: Task,
    pub classifier: ClassifierKind,
    pub data: DataConfig,
    pub split: SplitConfig,
    pub embedding: EmbeddingConfig,
    pub boost: BoostParams,
    pub boost_class_weights: WeightScheme,
    pub neural: NeuralSettings,
    pub threshold: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) -> Result<(), RunError> {
    for (k, v) in table {
        let full = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        let value = match v {
            toml::Value::Table(t) => {
                flatten(&full, t, out)?;
                continue;
            }
            toml::Value::String(s) => Value::Str(s.clone()),
            toml::Value::Integer(i) => Value::Int(*i),
            toml::Value::Float(f) => Value::Float(*f),
            toml::Value::Boolean(b) => Value::Bool(*b),
            other => return Err(RunError::Config(format!("{full}: unsupported value type {}", other.type_str()))),
        };
        out.insert(full, value);
    }
    Ok(())
}

fn check_kind(spec: &KeySpec, v: Value) -> Result<Value, RunError> {
    let err = |what: &str| RunError::Config(format!("{}: expected {what}", spec.key));
    match (spec.kind, v) {
        (KeyKind::Str | KeyKind::Path, Value::Str(s)) => {
            if s.is_empty() {
                return Err(err("a non-empty string"));
            }
            Ok(Value::Str(s))
        }
        (KeyKind::Choice(options), Value::Str(s)) => {
            if options.contains(&s.as_str()) {
                Ok(Value::Str(s))
            } else {
                Err(RunError::Config(format!("{}: {s:?} is not one of {}", spec.key, options.join(", "))))
            }
        }
        (KeyKind::Int, Value::Int(i)) if i >= 0 => Ok(Value::Int(i)),
        (KeyKind::Int, _) => Err(err("a non-negative integer")),
        (KeyKind::Float, Value::Float(f)) if f.is_finite() => Ok(Value::Float(f)),
        (KeyKind::Float, Value::Int(i)) => Ok(Value::Float(i as f64)),
        (KeyKind::Float, _) => Err(err("a finite number")),
        (KeyKind::Bool, Value::Bool(b)) => Ok(Value::Bool(b)),
        (KeyKind::Bool, _) => Err(err("true or false")),
        (_, _) => Err(err("a string")),
    }
}

fn parse_env_value(spec: &KeySpec, raw: &str) -> Result<Value, RunError> {
    let bad = || RunError::Config(format!("environment override for {}: cannot parse {raw:?}", spec.key));
    let v = match spec.kind {
        KeyKind::Str | KeyKind::Path | KeyKind::Choice(_) => Value::Str(raw.to_string()),
        KeyKind::Int => Value::Int(raw.trim().parse().map_err(|_| bad())?),
        KeyKind::Float => Value::Float(raw.trim().parse().map_err(|_| bad())?),
        KeyKind::Bool => Value::Bool(raw.trim().parse().map_err(|_| bad())?),
    };
    check_kind(spec, v)
}

/// `ABUSEBENCH_NEURAL__EPOCHS` → `neural.epochs`.
pub fn env_key(var: &str) -> Option<String> {
    var.strip_prefix(ENV_PREFIX).map(|rest| rest.to_ascii_lowercase().replace("__", "."))
}

struct Raw {
    values: BTreeMap<String, Value>,
}

impl Raw {
    fn str(&self, k: &str) -> Option<String> {
        match self.values.get(k) {
            Some(Value::Str(s)) => Some(s.clone()),
            _ => None,
        }
    }

    fn int(&self, k: &str) -> Option<u64> {
        match self.values.get(k) {
            Some(Value::Int(i)) => Some(*i as u64),
            _ => None,
        }
    }

    fn usize(&self, k: &str) -> Option<usize> {
        self.int(k).map(|i| i as usize)
    }

    fn float(&self, k: &str) -> Option<f64> {
        match self.values.get(k) {
            Some(Value::Float(f)) => Some(*f),
            _ => None,
        }
    }

    fn bool(&self, k: &str) -> Option<bool> {
        match self.values.get(k) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    fn required(&self, k: &str) -> Result<String, RunError> {
        self.str(k).ok_or_else(|| RunError::Config(format!("missing required key {k}")))
    }

    fn parsed<T: FromStr<Err = String>>(&self, k: &str) -> Result<Option<T>, RunError> {
        self.str(k).map(|s| s.parse().map_err(|e: String| RunError::Config(format!("{k}: {e}")))).transpose()
    }
}

impl ExperimentConfig {
    /// Parses config text. `base_dir` anchors relative paths; `env` supplies
    /// overrides as `(variable, value)` pairs (non-prefixed variables are ignored).
    pub fn parse<I, K, V>(input: &str, base_dir: &Path, env: I) -> Result<Self, RunError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let table: toml::Table = input.parse().map_err(|e: toml::de::Error| RunError::Config(e.message().to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat)?;
        let mut values = BTreeMap::new();
        for (k, v) in flat {
            let spec = key_spec(&k).ok_or_else(|| RunError::Config(format!("unknown key {k}")))?;
            values.insert(k, check_kind(spec, v)?);
        }
        for (var, raw) in env {
            let Some(k) = env_key(var.as_ref()) else { continue };
            let spec = key_spec(&k)
                .ok_or_else(|| RunError::Config(format!("environment variable {} names unknown key {k}", var.as_ref())))?;
            values.insert(k, parse_env_value(spec, raw.as_ref())?);
        }
        Self::resolve(Raw { values }, base_dir)
    }

    /// Reads a config file, applying overrides from the process environment.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        Self::load_with_env(path, std::env::vars())
    }

    pub fn load_with_env<I, K, V>(path: &Path, env: I) -> Result<Self, RunError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::parse(&text, base, env).map_err(|e| match e {
            RunError::Config(m) => RunError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn resolve(raw: Raw, base_dir: &Path) -> Result<Self, RunError> {
        let task: Task = raw.parsed("task")?.ok_or_else(|| RunError::Config("missing required key task".into()))?;
        let classifier: ClassifierKind =
            raw.parsed("classifier")?.ok_or_else(|| RunError::Config("missing required key classifier".into()))?;
        let train = PathBuf::from(raw.required("data.train")?);
        let test = PathBuf::from(raw.required("data.test")?);
        let format = raw.parsed("data.format")?.unwrap_or_else(|| DataFormat::from_path(&train));
        let (pos, neg) = task.class_names();
        let data = DataConfig {
            train,
            test,
            format,
            positive_label: raw.str("data.positive_label").unwrap_or_else(|| pos.to_string()),
            negative_label: raw.str("data.negative_label").unwrap_or_else(|| neg.to_string()),
        };
        if data.positive_label == data.negative_label {
            return Err(RunError::Config("data.positive_label and data.negative_label must differ".into()));
        }

        // Protocol defaults: the balanced task holds out a validation split and
        // keeps the best epoch; the imbalanced one trains on everything with
        // inverse-frequency weights and keeps the last epoch.
        let (split_default, selection_default, weights_default) = match task {
            Task::Abusive => (true, Selection::BestValidation, WeightScheme::Uniform),
            Task::Threatening => (false, Selection::LastEpoch, WeightScheme::InverseFrequency),
        };
        let split = SplitConfig {
            enabled: raw.bool("split.enabled").unwrap_or(split_default),
            fraction: raw.float("split.fraction").unwrap_or(0.85),
            seed: raw.int("split.seed").unwrap_or(13),
        };
        if !(split.fraction > 0.0 && split.fraction < 1.0) {
            return Err(RunError::Config(format!("split.fraction must be in (0, 1), got {}", split.fraction)));
        }

        let provider = match raw.str("embedding.provider").as_deref() {
            None | Some("hashing") => EmbeddingProviderKind::Hashing,
            Some(_) => EmbeddingProviderKind::Precomputed,
        };
        let embedding = EmbeddingConfig {
            provider,
            dim: raw.usize("embedding.dim").unwrap_or(match provider {
                EmbeddingProviderKind::Hashing => DEFAULT_HASH_DIM,
                EmbeddingProviderKind::Precomputed => DEFAULT_PRECOMPUTED_DIM,
            }),
            seed: raw.int("embedding.seed").unwrap_or(0),
            path: raw.str("embedding.path").map(PathBuf::from),
            test_path: raw.str("embedding.test_path").map(PathBuf::from),
        };
        if provider == EmbeddingProviderKind::Hashing && embedding.dim < 2 {
            return Err(RunError::Config("embedding.dim must be at least 2".into()));
        }
        if classifier.is_boosted() && provider == EmbeddingProviderKind::Precomputed && embedding.path.is_none() {
            return Err(RunError::Config("embedding.provider = precomputed needs embedding.path".into()));
        }

        let mut boost = match classifier {
            ClassifierKind::BoostedLgbmLike => BoostParams::lgbm_like(),
            _ => BoostParams::xgb_like(),
        };
        if let Some(v) = raw.usize("boost.n_rounds") {
            boost.n_rounds = v;
        }
        if let Some(v) = raw.usize("boost.max_depth") {
            boost.max_depth = v;
        }
        if let Some(v) = raw.float("boost.learning_rate") {
            boost.learning_rate = v;
        }
        if let Some(v) = raw.float("boost.lambda") {
            boost.lambda = v;
        }
        if let Some(v) = raw.float("boost.min_child_hessian") {
            boost.min_child_hessian = v;
        }
        if let Some(v) = raw.float("boost.gamma") {
            boost.gamma = v;
        }
        if let Some(v) = raw.int("boost.seed") {
            boost.seed = v;
        }
        if let Some(v) = raw.parsed::<Growth>("boost.growth")? {
            boost.growth = v;
        }
        if let Some(v) = raw.usize("boost.max_leaves") {
            boost.max_leaves = v;
        }
        if let Some(v) = raw.float("boost.base_score") {
            boost.base_score = v;
        }
        boost.validate().map_err(|e| RunError::Config(e.to_string()))?;

        let defaults = TrainConfig::default();
        let neural = NeuralSettings {
            epochs: raw.usize("neural.epochs").unwrap_or(defaults.epochs),
            learning_rate: raw.float("neural.learning_rate").unwrap_or(defaults.learning_rate),
            batch_size: raw.usize("neural.batch_size").unwrap_or(defaults.batch_size),
            selection: raw.parsed("neural.selection")?.unwrap_or(selection_default),
            class_weights: raw.parsed("neural.class_weights")?.unwrap_or(weights_default),
            seed: raw.int("neural.seed").unwrap_or(defaults.seed),
            beta1: raw.float("neural.beta1").unwrap_or(defaults.beta1),
            beta2: raw.float("neural.beta2").unwrap_or(defaults.beta2),
            epsilon: raw.float("neural.epsilon").unwrap_or(defaults.epsilon),
            weight_decay: raw.float("neural.weight_decay").unwrap_or(defaults.weight_decay),
            max_len: raw.usize("neural.max_len").unwrap_or(64),
            embed_dim: raw.usize("neural.embed_dim").unwrap_or(32),
            hidden_dim: raw.usize("neural.hidden_dim").unwrap_or(32),
            vocab_size: raw.usize("neural.vocab_size").unwrap_or(20_000),
            min_count: raw.usize("neural.min_count").unwrap_or(1),
            checkpoint: raw.str("neural.checkpoint").map(PathBuf::from),
        };
        neural.train_config(ClassWeights::UNIFORM).validate().map_err(|e| RunError::Config(e.to_string()))?;
        if neural.max_len == 0 || neural.embed_dim == 0 || neural.hidden_dim == 0 || neural.vocab_size < 3 {
            return Err(RunError::Config("neural.max_len, embed_dim, hidden_dim must be positive and vocab_size >= 3".into()));
        }
        if !classifier.is_boosted() && neural.selection == Selection::BestValidation && !split.enabled {
            return Err(RunError::Config("neural.selection = best_validation needs split.enabled = true".into()));
        }

        let threshold = raw.float("evaluate.threshold").unwrap_or(crate::metrics::DEFAULT_THRESHOLD);
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(RunError::Config(format!("evaluate.threshold must be in (0, 1), got {threshold}")));
        }

        Ok(ExperimentConfig {
            name: raw.str("name").unwrap_or_else(|| classifier.as_str().to_string()),
            task,
            classifier,
            data,
            split,
            embedding,
            boost,
            boost_class_weights: raw.parsed("boost.class_weights")?.unwrap_or_default(),
            neural,
            threshold,
            output_dir: PathBuf::from(raw.str("output.dir").unwrap_or_else(|| "runs".into())),
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_root(&self) -> PathBuf {
        self.resolve_path(&self.output_dir)
    }

    /// Directory holding this run's artifacts.
    pub fn run_dir(&self) -> PathBuf {
        self.output_root().join(format!("{}-{}", sanitize(&self.name), self.task))
    }

    /// Checks every referenced input exists. Runs before any work is done.
    pub fn validate_inputs(&self) -> Result<(), RunError> {
        let mut required: Vec<(&str, &Path)> = vec![("data.train", &self.data.train), ("data.test", &self.data.test)];
        if self.classifier.is_boosted() && self.embedding.provider == EmbeddingProviderKind::Precomputed {
            if let Some(p) = &self.embedding.path {
                required.push(("embedding.path", p));
            }
            if let Some(p) = &self.embedding.test_path {
                required.push(("embedding.test_path", p));
            }
        }
        if self.classifier == ClassifierKind::NeuralCheckpoint {
            if let Some(p) = &self.neural.checkpoint {
                required.push(("neural.checkpoint", p));
            }
        }
        for (key, p) in required {
            let full = self.resolve_path(p);
            if !full.exists() {
                return Err(RunError::Config(format!("{key}: {} does not exist", full.display())));
            }
        }
        Ok(())
    }

    /// Only the settings that can change this run's results; sections for
    /// other classifier families and the output location are left out.
    pub fn semantic_view(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("config is an object");
        if self.classifier.is_boosted() {
            obj.remove("neural");
            obj.remove("split");
        } else {
            obj.remove("boost");
            obj.remove("boost_class_weights");
            obj.remove("embedding");
            if self.classifier == ClassifierKind::NeuralScratch {
                if let Some(n) = obj.get_mut("neural").and_then(|n| n.as_object_mut()) {
                    n.remove("checkpoint");
                }
            }
        }
        v
    }

    /// Short hex digest of [`Self::semantic_view`]; independent of key order
    /// and formatting in the source file.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(&self.semantic_view()).expect("value serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}
