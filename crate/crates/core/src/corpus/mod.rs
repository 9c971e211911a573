//! Labeled corpora in the shared-task shape: loading, validation, class
//! statistics, class weights and deterministic stratified splits.

mod io;
mod split;
pub mod synthetic;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub use io::{
    load_dataset, load_unlabeled, parse_dataset, parse_unlabeled, write_dataset, DataFormat,
    LabelMap, UnlabeledExample,
};
pub use split::{ids_digest, stratified_split, SplitManifest};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: u64, id: String },
    #[error("line {line}: label {label:?} is not in the label map")]
    UnknownLabel { line: u64, label: String },
    #[error("line {line}: text of {id:?} is empty after normalization")]
    EmptyText { line: u64, id: String },
    #[error("class {0} has no examples")]
    DegenerateClass(Label),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Binary class. `Positive` is always the harmful class (abusive / threatening).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.as_u8())
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl From<bool> for Label {
    fn from(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Which shared subtask a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Abusive,
    Threatening,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Abusive, Task::Threatening];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Abusive => "abusive",
            Task::Threatening => "threatening",
        }
    }

    /// Canonical class names used by the shared task: (positive, negative).
    pub fn class_names(self) -> (&'static str, &'static str) {
        match self {
            Task::Abusive => ("Abusive", "Non-Abusive"),
            Task::Threatening => ("Threatening", "Non-Threatening"),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abusive" => Ok(Task::Abusive),
            "threatening" => Ok(Task::Threatening),
            other => Err(format!("unknown task {other:?} (expected abusive or threatening)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: Label,
}

/// An ordered collection of examples. Order is load order and every operation
/// that derives a new dataset preserves relative order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub task: Task,
    examples: Vec<LabeledExample>,
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate ids and empty ids or texts.
    /// Texts are taken as given; use [`normalize_text`] first for raw input.
    pub fn new(
        name: impl Into<String>,
        task: Task,
        examples: Vec<LabeledExample>,
    ) -> Result<Self, CorpusError> {
        let mut seen = std::collections::HashSet::with_capacity(examples.len());
        for (i, ex) in examples.iter().enumerate() {
            let line = i as u64 + 1;
            if ex.id.is_empty() {
                return Err(CorpusError::Parse { line, message: "empty id".into() });
            }
            if ex.text.is_empty() {
                return Err(CorpusError::EmptyText { line, id: ex.id.clone() });
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(CorpusError::DuplicateId { line, id: ex.id.clone() });
            }
        }
        Ok(Dataset { name: name.into(), task, examples })
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.examples.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// Keeps the examples for which `keep` returns true, in order.
    pub fn filtered(&self, name: impl Into<String>, mut keep: impl FnMut(&LabeledExample) -> bool) -> Dataset {
        Dataset {
            name: name.into(),
            task: self.task,
            examples: self.examples.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }
}

/// NFC, trim, and collapse internal whitespace runs to one ASCII space.
pub fn normalize_text(raw: &str) -> String {
    let nfc: String = raw.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub n_positive: usize,
    pub n_negative: usize,
    pub total: usize,
}

impl ClassCounts {
    pub fn new(n_positive: usize, n_negative: usize) -> Self {
        ClassCounts { n_positive, n_negative, total: n_positive + n_negative }
    }

    pub fn of(&self, label: Label) -> usize {
        match label {
            Label::Positive => self.n_positive,
            Label::Negative => self.n_negative,
        }
    }
}

pub fn dataset_stats(dataset: &Dataset) -> ClassCounts {
    let n_positive = dataset.examples().iter().filter(|e| e.label.is_positive()).count();
    ClassCounts::new(n_positive, dataset.len() - n_positive)
}

/// Per-class multipliers applied to each example's loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub w_positive: f64,
    pub w_negative: f64,
}

impl ClassWeights {
    pub const UNIFORM: ClassWeights = ClassWeights { w_positive: 1.0, w_negative: 1.0 };

    pub fn of(&self, label: Label) -> f64 {
        match label {
            Label::Positive => self.w_positive,
            Label::Negative => self.w_negative,
        }
    }
}

impl Default for ClassWeights {
    fn default() -> Self {
        Self::UNIFORM
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    Uniform,
    InverseFrequency,
}

impl FromStr for WeightScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(WeightScheme::Uniform),
            "inverse_frequency" => Ok(WeightScheme::InverseFrequency),
            other => Err(format!("unknown weight scheme {other:?}")),
        }
    }
}

/// `InverseFrequency` gives `w_c = total / (2 * n_c)`, so the mean weight over
/// all examples is exactly one.
pub fn class_weights(counts: ClassCounts, scheme: WeightScheme) -> Result<ClassWeights, CorpusError> {
    match scheme {
        WeightScheme::Uniform => Ok(ClassWeights::UNIFORM),
        WeightScheme::InverseFrequency => {
            for label in [Label::Positive, Label::Negative] {
                if counts.of(label) == 0 {
                    return Err(CorpusError::DegenerateClass(label));
                }
            }
            let total = counts.total as f64;
            Ok(ClassWeights {
                w_positive: total / (2.0 * counts.n_positive as f64),
                w_negative: total / (2.0 * counts.n_negative as f64),
            })
        }
    }
}
