//! Fixture corpora and configs shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;

use std::fs;
use std::path::{Path, PathBuf};

use abusebench::corpus::synthetic::{generate, SyntheticCorpus, SyntheticSpec};
use abusebench::corpus::{write_dataset, DataFormat, LabelMap, Task};
use abusebench::neural::{save_checkpoint, train_classifier, NeuralClassifier, Selection, TrainConfig, Vocab};
use abusebench::ClassWeights;

pub const CLASSIFIERS: [&str; 4] = ["boosted_xgb_like", "boosted_lgbm_like", "neural_scratch", "neural_checkpoint"];

/// Train/test sizes per task: balanced for abusive, 1:5 for threatening.
pub fn sizes(task: Task) -> ((usize, usize), (usize, usize)) {
    match task {
        Task::Abusive => ((120, 120), (40, 40)),
        Task::Threatening => ((40, 200), (12, 60)),
    }
}

pub fn corpus(task: Task, split: &str, n_pos: usize, n_neg: usize, seed: u64) -> SyntheticCorpus {
    let mut spec = SyntheticSpec::separable(&format!("{task}-{split}"), task, n_pos, n_neg, seed);
    spec.id_prefix = format!("{task}-{split}-");
    let c = generate(&spec);
    assert!(c.is_separable(), "fixture generator must produce a separable corpus");
    c
}

/// Writes `<task>-train.tsv` and `<task>-test.tsv` into `dir`.
pub fn write_task_data(dir: &Path, task: Task) -> (PathBuf, PathBuf) {
    let ((tp, tn), (sp, sn)) = sizes(task);
    let seed = match task {
        Task::Abusive => 101,
        Task::Threatening => 202,
    };
    let map = LabelMap::for_task(task);
    let train = dir.join(format!("{task}-train.tsv"));
    let test = dir.join(format!("{task}-test.tsv"));
    write_dataset(&corpus(task, "train", tp, tn, seed).dataset, &train, DataFormat::Tsv, &map).unwrap();
    write_dataset(&corpus(task, "test", sp, sn, seed + 1).dataset, &test, DataFormat::Tsv, &map).unwrap();
    (train, test)
}

/// A small model trained on an unrelated corpus, saved as a checkpoint
/// directory to fine-tune from.
pub fn write_encoder_checkpoint(dir: &Path) -> PathBuf {
    let c = corpus(Task::Abusive, "pretrain", 60, 60, 7);
    let vocab = Vocab::build(c.dataset.examples().iter().map(|e| e.text.as_str()), 20_000, 1);
    let model = NeuralClassifier::new(vocab, 64, 16, 16, 5).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        learning_rate: 0.01,
        selection: Selection::LastEpoch,
        class_weights: ClassWeights::UNIFORM,
        ..TrainConfig::default()
    };
    let trained = train_classifier(model, &c.dataset, None, &cfg).unwrap().model;
    let path = dir.join("encoder");
    save_checkpoint(&trained, &path).unwrap();
    path
}

pub fn config_text(classifier: &str, task: Task, extra: &str) -> String {
    let mut s = format!(
        "name = \"{classifier}\"\ntask = \"{task}\"\nclassifier = \"{classifier}\"\n\
         data.train = \"{task}-train.tsv\"\ndata.test = \"{task}-test.tsv\"\noutput.dir = \"runs\"\n\
         embedding.dim = 64\nboost.n_rounds = 20\n\
         neural.epochs = 8\nneural.learning_rate = 0.01\nneural.embed_dim = 16\nneural.hidden_dim = 16\n"
    );
    if classifier == "neural_checkpoint" {
        s.push_str("neural.checkpoint = \"encoder\"\n");
    }
    s.push_str(extra);
    s
}

/// Data for both tasks, the encoder checkpoint, and one config per
/// classifier and task. Returns config paths, classifier-major.
pub fn write_matrix_fixture(dir: &Path) -> Vec<PathBuf> {
    for task in Task::ALL {
        write_task_data(dir, task);
    }
    write_encoder_checkpoint(dir);
    let mut paths = Vec::new();
    for classifier in CLASSIFIERS {
        for task in Task::ALL {
            let p = dir.join(format!("{classifier}-{task}.toml"));
            fs::write(&p, config_text(classifier, task, "")).unwrap();
            paths.push(p);
        }
    }
    paths
}

/// Random small model, batch and weights for gradient checking. Every
/// sequence has at least one real token; later positions may be padding.
pub fn gradient_fixture(seed: u64) -> (NeuralClassifier, Vec<abusebench::neural::TokenSequence>, Vec<abusebench::corpus::Label>, ClassWeights) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tokens = ["[PAD]", "[UNK]", "a", "b", "c", "d", "e", "f"];
    let vocab = Vocab::from_tokens(tokens).unwrap();
    let (max_len, embed, hidden) = (5, 4, 3);
    let mut model = NeuralClassifier::new(vocab, max_len, embed, hidden, seed).unwrap();
    for (_, t) in model.params.named_mut() {
        for v in t.data.iter_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    let batch = (0..6)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            let mut ids: Vec<u32> = (0..len).map(|_| rng.random_range(1..tokens.len() as u32)).collect();
            ids.resize(max_len, 0);
            abusebench::neural::TokenSequence { ids }
        })
        .collect();
    let labels = (0..6).map(|_| abusebench::corpus::Label::from(rng.random_bool(0.4))).collect();
    let weights = ClassWeights { w_positive: rng.random_range(0.5..3.0), w_negative: rng.random_range(0.5..3.0) };
    (model, batch, labels, weights)
}
