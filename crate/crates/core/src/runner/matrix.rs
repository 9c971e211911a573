//! Runs many experiments and tabulates them as classifier rows by task columns.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ClassifierKind, ExperimentConfig};
use super::experiment::{execute, persist, ResultRow};
use super::{RunError, Stage, PARTIAL_FAILURE_EXIT};
use crate::corpus::Task;

pub const LEADERBOARD_FILE: &str = "leaderboard.txt";
pub const MATRIX_FILE: &str = "matrix.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRow {
    pub name: String,
    pub classifier: ClassifierKind,
    pub task: Task,
    pub config_hash: String,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MatrixRecord {
    Ok(ResultRow),
    Failed(FailedRow),
}

impl MatrixRecord {
    fn key(&self) -> (&str, Task) {
        match self {
            MatrixRecord::Ok(r) => (&r.name, r.task),
            MatrixRecord::Failed(f) => (&f.name, f.task),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    /// One per config, in input order.
    pub records: Vec<MatrixRecord>,
    pub leaderboard: String,
}

impl MatrixOutcome {
    pub fn n_failed(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, MatrixRecord::Failed(_))).count()
    }

    /// 0 when everything succeeded, otherwise the partial-failure status.
    pub fn exit_code(&self) -> i32 {
        if self.n_failed() == 0 {
            0
        } else {
            PARTIAL_FAILURE_EXIT
        }
    }

    pub fn jsonl(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
    }
}

enum Cell<'a> {
    Ok(&'a ResultRow),
    Failed,
    Missing,
}

fn cell<'a>(cells: &BTreeMap<Task, &'a MatrixRecord>, t: Task) -> Cell<'a> {
    match cells.get(&t) {
        Some(MatrixRecord::Ok(row)) => Cell::Ok(row),
        Some(MatrixRecord::Failed(_)) => Cell::Failed,
        None => Cell::Missing,
    }
}

/// Fixed-width table: one row per experiment name, an F1 / ROC-AUC pair per
/// task. Rows are ordered by F1 on the first task column, best first; rows
/// without a result there (failed or absent) come last.
pub fn render_leaderboard(records: &[MatrixRecord]) -> String {
    let tasks: Vec<Task> = Task::ALL.into_iter().filter(|t| records.iter().any(|r| r.key().1 == *t)).collect();
    let mut by_name: BTreeMap<&str, BTreeMap<Task, &MatrixRecord>> = BTreeMap::new();
    for r in records {
        let (name, task) = r.key();
        by_name.entry(name).or_default().insert(task, r);
    }
    let mut rows: Vec<(&str, &BTreeMap<Task, &MatrixRecord>)> = by_name.iter().map(|(n, c)| (*n, c)).collect();
    let first_f1 = |c: &BTreeMap<Task, &MatrixRecord>| match tasks.first().map(|&t| cell(c, t)) {
        Some(Cell::Ok(r)) => Some(r.f1_positive),
        _ => None,
    };
    rows.sort_by(|a, b| match (first_f1(a.1), first_f1(b.1)) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.0.cmp(b.0)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.0.cmp(b.0),
    });

    let name_w = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max("Classifier".len()) + 2;
    const CELL_W: usize = 20;
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "Classifier");
    for t in &tasks {
        let (pos, _) = t.class_names();
        let _ = write!(out, "{:<CELL_W$}", pos);
    }
    out = out.trim_end().to_string() + "\n";
    let mut sub = format!("{:<name_w$}", "");
    for _ in &tasks {
        let _ = write!(sub, "{:<CELL_W$}", format!("{:<9}{}", "F1", "ROC-AUC"));
    }
    out.push_str(sub.trim_end());
    out.push('\n');
    out.push_str(&"-".repeat(name_w + CELL_W * tasks.len()));
    out.push('\n');
    for (name, cells) in rows {
        let mut line = format!("{name:<name_w$}");
        for &t in &tasks {
            let text = match cell(cells, t) {
                Cell::Ok(r) => format!("{:<9.5}{:.5}", r.f1_positive, r.roc_auc),
                Cell::Failed => "FAILED".to_string(),
                Cell::Missing => "-".to_string(),
            };
            let _ = write!(line, "{text:<CELL_W$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Runs every config (in parallel), persists each success, and writes
/// `leaderboard.txt` and `matrix.jsonl` to `out_dir`. A failing experiment
/// becomes a FAILED record and does not stop the others.
pub fn run_matrix(configs: &[ExperimentConfig], out_dir: &Path) -> Result<MatrixOutcome, RunError> {
    let results: Vec<Result<_, RunError>> = configs.par_iter().map(execute).collect();
    let mut records = Vec::with_capacity(configs.len());
    for (cfg, result) in configs.iter().zip(results) {
        let result = result.and_then(|out| persist(cfg, &out).map(|_| out));
        records.push(match result {
            Ok(out) => MatrixRecord::Ok(out.row),
            Err(e) => {
                log::error!("{} / {}: {e}", cfg.name, cfg.task);
                MatrixRecord::Failed(FailedRow {
                    name: cfg.name.clone(),
                    classifier: cfg.classifier,
                    task: cfg.task,
                    config_hash: cfg.config_hash(),
                    error: e.to_string(),
                    exit_code: e.exit_code(),
                })
            }
        });
    }
    let leaderboard = render_leaderboard(&records);
    let outcome = MatrixOutcome { records, leaderboard };
    fs::create_dir_all(out_dir).map_err(|e| RunError::at(Stage::Write, format!("{}: {e}", out_dir.display())))?;
    for (file, text) in [(LEADERBOARD_FILE, outcome.leaderboard.clone()), (MATRIX_FILE, outcome.jsonl())] {
        let path = out_dir.join(file);
        fs::write(&path, text).map_err(|e| RunError::at(Stage::Write, format!("{}: {e}", path.display())))?;
    }
    Ok(outcome)
}
