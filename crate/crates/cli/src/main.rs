//! Command-line front end.
//!
//! Exit status: 0 success, 2 configuration error, 3 data error, 4 training
//! failure, 5 a matrix run where some experiments failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abusebench::corpus::{
    class_weights, dataset_stats, load_dataset, load_unlabeled, stratified_split, write_dataset, DataFormat,
    LabelMap, SplitManifest, Task, WeightScheme,
};
use abusebench::metrics;
use abusebench::runner::{run_experiment, run_matrix, write_submission, ExperimentConfig, ModelArtifact, RunError, Stage};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abusebench", version, about = "Abusive and threatening language classification benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// tsv or csv (default: from the file extension)
    #[arg(long)]
    format: Option<DataFormat>,
    /// Task whose class names are expected in the label column
    #[arg(long, default_value = "abusive")]
    task: Task,
    /// Label string of the positive class (overrides the task default)
    #[arg(long)]
    positive_label: Option<String>,
    /// Label string of the negative class (overrides the task default)
    #[arg(long)]
    negative_label: Option<String>,
}

impl DataArgs {
    fn label_map(&self) -> LabelMap {
        let (pos, neg) = self.task.class_names();
        LabelMap::new(
            self.positive_label.clone().unwrap_or_else(|| pos.into()),
            self.negative_label.clone().unwrap_or_else(|| neg.into()),
        )
    }

    fn format_for(&self, path: &Path) -> DataFormat {
        self.format.unwrap_or_else(|| DataFormat::from_path(path))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Class counts and imbalance of a labeled file
    Stats {
        data: PathBuf,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Stratified train/validation split of a labeled file
    Split {
        data: PathBuf,
        /// Fraction of each class kept for training
        #[arg(long, default_value_t = 0.85)]
        fraction: f64,
        #[arg(long, default_value_t = 13)]
        seed: u64,
        /// Output directory (default: next to the input)
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Train and evaluate one experiment config
    Train { config: PathBuf },
    /// Score a saved model on a labeled file
    Evaluate {
        model: PathBuf,
        data: PathBuf,
        #[arg(long)]
        format: Option<DataFormat>,
        /// Precomputed vectors for models that need them
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Run several configs and print a leaderboard
    Matrix {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Where leaderboard.txt and matrix.jsonl go
        #[arg(long, default_value = "matrix")]
        out: PathBuf,
    },
    /// Write a submission file for an unlabeled test file
    Submit {
        model: PathBuf,
        test_data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        format: Option<DataFormat>,
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
}

fn data_err(e: impl std::fmt::Display) -> RunError {
    RunError::at(Stage::Load, e)
}

fn stats(data: &Path, args: &DataArgs) -> Result<(), RunError> {
    let ds = load_dataset(data, args.format_for(data), &args.label_map(), args.task).map_err(data_err)?;
    let counts = dataset_stats(&ds);
    let total = counts.n_positive + counts.n_negative;
    let map = args.label_map();
    println!("file        {}", data.display());
    println!("examples    {total}");
    println!("{:<12}{} ({:.2}%)", map.positive_name(), counts.n_positive, 100.0 * counts.n_positive as f64 / total as f64);
    println!("{:<12}{} ({:.2}%)", map.negative_name(), counts.n_negative, 100.0 * counts.n_negative as f64 / total as f64);
    if let Ok(w) = class_weights(counts, WeightScheme::InverseFrequency) {
        println!("inverse-frequency weights: positive {:.6}, negative {:.6}", w.w_positive, w.w_negative);
    }
    Ok(())
}

fn split(data: &Path, fraction: f64, seed: u64, out_dir: Option<&Path>, args: &DataArgs) -> Result<(), RunError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(RunError::Config(format!("--fraction must be in (0, 1), got {fraction}")));
    }
    let format = args.format_for(data);
    let map = args.label_map();
    let ds = load_dataset(data, format, &map, args.task).map_err(data_err)?;
    let (train, val) = stratified_split(&ds, fraction, seed).map_err(|e| RunError::at(Stage::Split, e))?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => {
            let stem = data.file_stem().map_or_else(|| "data".into(), |s| s.to_string_lossy().into_owned());
            data.with_file_name(format!("{stem}-split"))
        }
    };
    let write = |e: &dyn std::fmt::Display| RunError::at(Stage::Write, e.to_string());
    std::fs::create_dir_all(&dir).map_err(|e| write(&e))?;
    let ext = format.extension();
    write_dataset(&train, &dir.join(format!("train.{ext}")), format, &map).map_err(|e| write(&e))?;
    write_dataset(&val, &dir.join(format!("val.{ext}")), format, &map).map_err(|e| write(&e))?;
    let manifest = SplitManifest::describe(&train, &val, fraction, seed);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("split.json"), json).map_err(|e| write(&e))?;
    let (tc, vc) = (dataset_stats(&train), dataset_stats(&val));
    println!("train {} ({} / {})", train.len(), tc.n_positive, tc.n_negative);
    println!("val   {} ({} / {})", val.len(), vc.n_positive, vc.n_negative);
    println!("written to {}", dir.display());
    Ok(())
}

fn train(config: &Path) -> Result<(), RunError> {
    let cfg = ExperimentConfig::load(config)?;
    let out = run_experiment(&cfg)?;
    println!("{}", serde_json::to_string(&out.row).expect("row serializes"));
    Ok(())
}

fn evaluate(model: &Path, data: &Path, format: Option<DataFormat>, vectors: Option<&Path>) -> Result<(), RunError> {
    let artifact = ModelArtifact::load(model)?;
    let format = format.unwrap_or_else(|| DataFormat::from_path(data));
    let ds = load_dataset(data, format, &artifact.info.label_map(), artifact.info.task).map_err(data_err)?;
    let ids: Vec<String> = ds.ids().into_iter().map(String::from).collect();
    let texts: Vec<&str> = ds.examples().iter().map(|e| e.text.as_str()).collect();
    let scores = artifact.score(&ids, &texts, vectors)?;
    let report =
        metrics::evaluate(&scores, &ds.labels(), artifact.info.threshold).map_err(|e| RunError::at(Stage::Evaluate, e))?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn matrix(configs: &[PathBuf], out: &Path) -> Result<i32, RunError> {
    let cfgs = configs.iter().map(|p| ExperimentConfig::load(p)).collect::<Result<Vec<_>, _>>()?;
    let outcome = run_matrix(&cfgs, out)?;
    print!("{}", outcome.leaderboard);
    if outcome.n_failed() > 0 {
        eprintln!("{} of {} experiments failed; see {}", outcome.n_failed(), cfgs.len(), out.join("matrix.jsonl").display());
    }
    Ok(outcome.exit_code())
}

fn submit(
    model: &Path,
    test: &Path,
    out: &Path,
    format: Option<DataFormat>,
    vectors: Option<&Path>,
) -> Result<(), RunError> {
    let artifact = ModelArtifact::load(model)?;
    let format = format.unwrap_or_else(|| DataFormat::from_path(test));
    let examples = load_unlabeled(test, format).map_err(data_err)?;
    let ids: Vec<String> = examples.iter().map(|e| e.id.clone()).collect();
    let texts: Vec<&str> = examples.iter().map(|e| e.text.as_str()).collect();
    let scores = artifact.score(&ids, &texts, vectors)?;
    let preds: Vec<_> = scores.iter().map(|&s| (s >= artifact.info.threshold).into()).collect();
    write_submission(&ids, &preds, out, &artifact.info.label_map())?;
    println!("wrote {} rows to {}", ids.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Stats { data, data_args } => stats(&data, &data_args).map(|_| 0),
        Command::Split { data, fraction, seed, out_dir, data_args } => {
            split(&data, fraction, seed, out_dir.as_deref(), &data_args).map(|_| 0)
        }
        Command::Train { config } => train(&config).map(|_| 0),
        Command::Evaluate { model, data, format, vectors } => evaluate(&model, &data, format, vectors.as_deref()).map(|_| 0),
        Command::Matrix { configs, out } => matrix(&configs, &out),
        Command::Submit { model, test_data, out, format, vectors } => {
            submit(&model, &test_data, &out, format, vectors.as_deref()).map(|_| 0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
