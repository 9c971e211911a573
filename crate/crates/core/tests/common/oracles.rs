//! Independent reference implementations, written without reusing library code paths.

use abusebench::boosted::BoostParams;
use abusebench::corpus::Label;
use abusebench::embeddings::EmbeddingMatrix;
use abusebench::neural::{NeuralClassifier, Parameters, TokenSequence};
use abusebench::ClassWeights;

/// Weighted binary cross-entropy, spelled out per class.
pub fn scalar_bce(s: f64, positive: bool, w_pos: f64, w_neg: f64) -> f64 {
    let s = s.max(1e-7).min(1.0 - 1e-7);
    if positive {
        w_pos * -s.ln()
    } else {
        w_neg * -(1.0 - s).ln()
    }
}

/// (tp, fp, fn, tn) by a direct loop.
pub fn counts(scores: &[f64], labels: &[Label], threshold: f64) -> (usize, usize, usize, usize) {
    let mut c = (0, 0, 0, 0);
    for i in 0..scores.len() {
        let predicted = scores[i] >= threshold;
        let actual = labels[i] == Label::Positive;
        match (predicted, actual) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, true) => c.2 += 1,
            (false, false) => c.3 += 1,
        }
    }
    c
}

/// 2tp / (2tp + fp + fn), zero when undefined.
pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let d = 2 * tp + fp + fn_;
    if d == 0 {
        0.0
    } else {
        (2 * tp) as f64 / d as f64
    }
}

/// Fraction of positive/negative pairs ranked correctly, ties counting half.
pub fn pair_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let (mut good, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == Label::Positive && labels[j] == Label::Negative {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    good += 1.0;
                } else if scores[i] == scores[j] {
                    good += 0.5;
                }
            }
        }
    }
    good / pairs
}

/// Best gain over every (feature, midpoint) pair, re-summing both sides from
/// scratch for each candidate. Same constraints as training.
pub fn exhaustive_best_gain(x: &EmbeddingMatrix, g: &[f64], h: &[f64], p: &BoostParams) -> Option<(usize, f64, f64)> {
    let n = x.n_rows();
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x.dim() {
        let mut vals: Vec<f64> = (0..n).map(|i| x.row(i)[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                if x.row(i)[f] <= t {
                    gl += g[i];
                    hl += h[i];
                } else {
                    gr += g[i];
                    hr += h[i];
                }
            }
            if hl < p.min_child_hessian || hr < p.min_child_hessian {
                continue;
            }
            let score = |g: f64, h: f64| g * g / (h + p.lambda);
            let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - p.gamma;
            if best.is_none_or(|(_, _, b)| gain > b) {
                best = Some((f, t, gain));
            }
        }
    }
    best
}

/// Mean weighted loss from the forward pass alone.
pub fn forward_loss(model: &NeuralClassifier, batch: &[TokenSequence], labels: &[Label], w: &ClassWeights) -> f64 {
    let out = model.forward(batch).unwrap();
    let total: f64 = out
        .iter()
        .zip(labels)
        .map(|(p, &l)| scalar_bce(p.s1, l == Label::Positive, w.w_positive, w.w_negative))
        .sum();
    total / labels.len() as f64
}

/// Largest relative difference between analytic and central-difference
/// gradients over every parameter.
pub fn max_gradient_error(model: &NeuralClassifier, batch: &[TokenSequence], labels: &[Label], w: &ClassWeights, step: f64) -> f64 {
    let (_, analytic) = model.loss_and_gradients(batch, labels, w).unwrap();
    let mut worst: f64 = 0.0;
    for name in Parameters::NAMES {
        let n = tensor(&model.params, name).data.len();
        for k in 0..n {
            let mut plus = model.clone();
            tensor_mut(&mut plus.params, name).data[k] += step;
            let mut minus = model.clone();
            tensor_mut(&mut minus.params, name).data[k] -= step;
            let numeric = (forward_loss(&plus, batch, labels, w) - forward_loss(&minus, batch, labels, w)) / (2.0 * step);
            let a = tensor(&analytic, name).data[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
        }
    }
    worst
}

fn tensor<'a>(p: &'a Parameters, name: &str) -> &'a abusebench::neural::Tensor {
    p.named().into_iter().find(|(n, _)| *n == name).unwrap().1
}

fn tensor_mut<'a>(p: &'a mut Parameters, name: &str) -> &'a mut abusebench::neural::Tensor {
    p.named_mut().into_iter().find(|(n, _)| *n == name).unwrap().1
}
