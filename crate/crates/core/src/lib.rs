//! Experiment harness for binary abusive / threatening language classification.
//!
//! The pipeline compares two classifier families on the same labeled corpora:
//!
//! * a second-order gradient-boosted tree ensemble ([`boosted`]) trained over
//!   fixed sentence vectors ([`embeddings`]);
//! * a small neural text classifier ([`neural`]) trained with class-weighted
//!   binary cross-entropy under a fixed epoch budget and a validation-based or
//!   last-epoch checkpoint selection protocol.
//!
//! Both are scored with [`metrics`] (positive-class F1, macro F1, ROC-AUC) and
//! orchestrated by [`runner`], which renders leaderboard tables and writes
//! shared-task submission files.

pub mod boosted;
pub mod corpus;
pub mod embeddings;
pub mod hashing;
pub mod metrics;
pub mod neural;
pub mod runner;

pub use corpus::{ClassCounts, ClassWeights, Dataset, Label, LabeledExample, Task};
pub use metrics::{ConfusionMatrix, EvalReport};

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
