//! Binary classification metrics: confusion counts, F1 and ROC-AUC.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{scores} scores but {labels} labels")]
    ShapeError { scores: usize, labels: usize },
    #[error("no examples to evaluate")]
    Empty,
    #[error("ROC-AUC needs both classes; all labels are {0}")]
    DegenerateLabels(Label),
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
    #[error("threshold {0} is outside (0, 1)")]
    BadThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same predictions scored with the negative class as "positive".
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix { tp: self.tn, fp: self.fn_, fn_: self.fp, tn: self.tp }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_aligned(scores: &[f64], labels: &[Label]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::ShapeError { scores: scores.len(), labels: labels.len() });
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(i));
    }
    Ok(())
}

/// Counts with `score >= threshold` predicted positive.
pub fn confusion(scores: &[f64], labels: &[Label], threshold: f64) -> Result<ConfusionMatrix, MetricsError> {
    check_aligned(scores, labels)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MetricsError::BadThreshold(threshold));
    }
    let mut cm = ConfusionMatrix::default();
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Positive-class F1; zero whenever precision and recall are both zero.
pub fn f1(cm: &ConfusionMatrix) -> f64 {
    let (p, r) = (cm.precision(), cm.recall());
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Unweighted mean of the F1 of each class taken as the positive class.
pub fn f1_macro(cm: &ConfusionMatrix) -> f64 {
    (f1(cm) + f1(&cm.swapped())) / 2.0
}

/// Mann-Whitney ROC-AUC with ties counted one half, computed from midranks in
/// `O(n log n)`.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<f64, MetricsError> {
    check_aligned(scores, labels)?;
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 {
        return Err(MetricsError::DegenerateLabels(Label::Negative));
    }
    if n_neg == 0 {
        return Err(MetricsError::DegenerateLabels(Label::Positive));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of (doubled) midranks of positives keeps everything integral.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the midrank (i + j + 2) / 2
        let twice_mid = (i + j + 2) as u128;
        let pos_in_group = order[i..=j].iter().filter(|&&k| labels[k].is_positive()).count() as u128;
        twice_rank_sum += twice_mid * pos_in_group;
        i = j + 1;
    }
    let n_pos = n_pos as u128;
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub f1_positive: f64,
    pub f1_macro: f64,
    pub roc_auc: f64,
    pub threshold: f64,
    pub n: usize,
}

pub fn evaluate(scores: &[f64], labels: &[Label], threshold: f64) -> Result<EvalReport, MetricsError> {
    let cm = confusion(scores, labels, threshold)?;
    Ok(EvalReport {
        confusion: cm,
        f1_positive: f1(&cm),
        f1_macro: f1_macro(&cm),
        roc_auc: roc_auc(scores, labels)?,
        threshold,
        n: scores.len(),
    })
}
