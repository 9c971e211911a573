mod common;

use std::fs;
use std::path::Path;

use abusebench::corpus::Task;
use abusebench::embeddings::{embed_batch, save_precomputed, HashingEmbedder};
use abusebench::runner::{
    execute, run_experiment, run_matrix, ExperimentConfig, MatrixRecord, ModelArtifact, RunError, RESULTS_FILE,
};

const NO_ENV: [(&str, &str); 0] = [];

fn load(dir: &Path, name: &str, text: &str) -> ExperimentConfig {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    ExperimentConfig::load_with_env(&p, NO_ENV).unwrap()
}

fn strip_wall_time(jsonl: &str) -> Vec<serde_json::Value> {
    jsonl
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("wall_time");
            v
        })
        .collect()
}

#[test]
fn abusive_defaults_fit_separable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    common::write_task_data(dir.path(), Task::Abusive);
    let cfg = load(dir.path(), "a.toml", &common::config_text("neural_scratch", Task::Abusive, ""));
    assert!(cfg.split.enabled);
    let out = run_experiment(&cfg).unwrap();
    assert!(out.row.f1_positive >= 0.95, "f1 {}", out.row.f1_positive);
    let sel = out.selected_epoch.unwrap();
    let best = out.history.iter().filter_map(|r| r.val_f1).fold(f64::MIN, f64::max);
    assert_eq!(out.history[sel - 1].val_f1, Some(best));

    let run_dir = cfg.run_dir();
    for f in ["report.json", "submission.csv", "model/model.json", "model/checkpoint/manifest.json"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let results = fs::read_to_string(cfg.output_root().join(RESULTS_FILE)).unwrap();
    assert_eq!(results.lines().count(), 1);
}

#[test]
fn missing_data_path_is_a_config_error_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load(dir.path(), "a.toml", &common::config_text("boosted_xgb_like", Task::Abusive, ""));
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, RunError::Config(ref m) if m.contains("data.train")), "{err}");
    assert_eq!(err.exit_code(), 2);
    assert!(!cfg.output_root().exists());
}

#[test]
fn reruns_are_identical_and_saved_models_reproduce_scores() {
    let dir = tempfile::tempdir().unwrap();
    common::write_task_data(dir.path(), Task::Threatening);
    for classifier in ["boosted_lgbm_like", "neural_scratch"] {
        let cfg = load(dir.path(), "t.toml", &common::config_text(classifier, Task::Threatening, ""));
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.test_scores, b.test_scores);
        assert_eq!(a.row.config_hash, b.row.config_hash);

        let model = ModelArtifact::load(&cfg.run_dir().join("model")).unwrap();
        assert_eq!(model, a.artifact);
        let texts: Vec<String> = fs::read_to_string(dir.path().join("threatening-test.tsv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split('\t').nth(1).unwrap().to_string())
            .collect();
        let texts: Vec<&str> = texts.iter().map(String::as_str).collect();
        assert_eq!(model.score(&a.test_ids, &texts, None).unwrap(), a.test_scores);
    }
    let results = fs::read_to_string(dir.path().join("runs").join(RESULTS_FILE)).unwrap();
    let rows = strip_wall_time(&results);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], rows[1]);
    assert_eq!(rows[2], rows[3]);
}

#[test]
fn checkpoint_classifier_without_checkpoint_matches_scratch() {
    let dir = tempfile::tempdir().unwrap();
    common::write_task_data(dir.path(), Task::Threatening);
    let scratch = load(dir.path(), "s.toml", &common::config_text("neural_scratch", Task::Threatening, ""));
    let text = common::config_text("neural_checkpoint", Task::Threatening, "").replace("neural.checkpoint = \"encoder\"\n", "");
    let degraded = load(dir.path(), "c.toml", &text);
    let (a, b) = (execute(&scratch).unwrap(), execute(&degraded).unwrap());
    assert_eq!(a.test_scores, b.test_scores);
    assert_ne!(a.row.config_hash, b.row.config_hash);
}

#[test]
fn precomputed_vectors_match_hashing_features() {
    let dir = tempfile::tempdir().unwrap();
    common::write_task_data(dir.path(), Task::Abusive);
    let hashing = load(dir.path(), "h.toml", &common::config_text("boosted_xgb_like", Task::Abusive, ""));
    let embedder = HashingEmbedder::new(64, 0).unwrap();
    for (split, file) in [("train", "train.vec"), ("test", "test.vec")] {
        let ds = abusebench::corpus::load_dataset(
            &dir.path().join(format!("abusive-{split}.tsv")),
            abusebench::corpus::DataFormat::Tsv,
            &hashing.data.label_map(),
            Task::Abusive,
        )
        .unwrap();
        save_precomputed(&embed_batch(&embedder, &ds).unwrap(), &dir.path().join(file)).unwrap();
    }
    let extra = "embedding.provider = \"precomputed\"\nembedding.path = \"train.vec\"\nembedding.test_path = \"test.vec\"\n";
    let text = common::config_text("boosted_xgb_like", Task::Abusive, "") + extra;
    let pre = load(dir.path(), "p.toml", &text);
    let (a, b) = (execute(&hashing).unwrap(), execute(&pre).unwrap());
    assert_eq!(a.test_scores, b.test_scores);

    let bad = load(dir.path(), "q.toml", &text.replace("embedding.dim = 64", "embedding.dim = 32"));
    let err = execute(&bad).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn single_config_matrix_equals_experiment() {
    let dir = tempfile::tempdir().unwrap();
    common::write_task_data(dir.path(), Task::Abusive);
    let cfg = load(dir.path(), "x.toml", &common::config_text("boosted_xgb_like", Task::Abusive, ""));
    let single = execute(&cfg).unwrap();
    let m = run_matrix(std::slice::from_ref(&cfg), &dir.path().join("m")).unwrap();
    assert_eq!(m.exit_code(), 0);
    let MatrixRecord::Ok(row) = &m.records[0] else { panic!("failed") };
    assert_eq!((row.f1_positive, row.f1_macro, row.roc_auc), (single.row.f1_positive, single.row.f1_macro, single.row.roc_auc));
    assert_eq!(row.config_hash, single.row.config_hash);
    assert_eq!(m.leaderboard.lines().count(), 4);
    assert!(m.leaderboard.lines().nth(3).unwrap().starts_with("boosted_xgb_like"));
}

#[test]
fn failing_experiment_is_reported_and_others_continue() {
    let dir = tempfile::tempdir().unwrap();
    common::write_task_data(dir.path(), Task::Abusive);
    fs::write(dir.path().join("broken.tsv"), "id\ttext\tlabel\n1\tx\tAbusive\n1\ty\tAbusive\n").unwrap();
    let good = load(dir.path(), "g.toml", &common::config_text("boosted_xgb_like", Task::Abusive, ""));
    let text = common::config_text("boosted_lgbm_like", Task::Abusive, "").replace("abusive-train.tsv", "broken.tsv");
    let broken = load(dir.path(), "b.toml", &text);
    let out = dir.path().join("m");
    let m = run_matrix(&[good, broken], &out).unwrap();
    assert_eq!(m.n_failed(), 1);
    assert_eq!(m.exit_code(), 5);
    assert!(matches!(&m.records[1], MatrixRecord::Failed(f) if f.exit_code == 3));
    let last = m.leaderboard.lines().last().unwrap();
    assert!(last.starts_with("boosted_lgbm_like") && last.contains("FAILED"), "{}", m.leaderboard);
    assert_eq!(fs::read_to_string(out.join("matrix.jsonl")).unwrap().lines().count(), 2);
}
