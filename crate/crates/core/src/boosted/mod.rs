//! Second-order gradient-boosted regression trees for binary log loss.
//!
//! Each round fits one tree to the per-example gradient `g = w (s - y)` and
//! hessian `h = w s (1 - s)` of the weighted log loss at the current scores
//! `s = sigmoid(logit)`. Splits are found by exact greedy search over the
//! midpoints between consecutive distinct feature values, scored by
//!
//! ```text
//! gain = 1/2 [ G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda) ] - gamma
//! ```
//!
//! and leaves take the Newton step `-G/(H+lambda)`. Ties in gain go to the
//! lowest feature index, then the lowest threshold.

mod grow;

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::embeddings::EmbeddingMatrix;
use crate::sigmoid;

pub use grow::{find_best_split, split_gain, SplitCandidate};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// How a tree is grown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Split every expandable node level by level up to `max_depth`.
    DepthWise,
    /// Repeatedly split the leaf with the highest gain until `max_leaves`.
    LeafWise,
}

impl FromStr for Growth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "depth_wise" => Ok(Growth::DepthWise),
            "leaf_wise" => Ok(Growth::LeafWise),
            other => Err(format!("unknown growth policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub min_child_hessian: f64,
    pub gamma: f64,
    /// Exact greedy search draws no random numbers; the seed is kept so a run
    /// records everything needed to reproduce it.
    pub seed: u64,
    pub growth: Growth,
    /// Leaf budget for leaf-wise growth; ignored depth-wise.
    pub max_leaves: usize,
    /// Initial logit for every example.
    pub base_score: f64,
}

impl BoostParams {
    /// Defaults of the popular depth-wise booster.
    pub fn xgb_like() -> Self {
        BoostParams {
            n_rounds: 100,
            max_depth: 6,
            learning_rate: 0.3,
            lambda: 1.0,
            min_child_hessian: 1.0,
            gamma: 0.0,
            seed: 0,
            growth: Growth::DepthWise,
            max_leaves: 0,
            base_score: 0.0,
        }
    }

    /// Defaults of the popular leaf-wise booster: 31 leaves, no depth limit in
    /// practice (31 leaves cannot exceed depth 30).
    pub fn lgbm_like() -> Self {
        BoostParams {
            n_rounds: 100,
            max_depth: 31,
            learning_rate: 0.1,
            lambda: 0.0,
            min_child_hessian: 1e-3,
            gamma: 0.0,
            seed: 0,
            growth: Growth::LeafWise,
            max_leaves: 31,
            base_score: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), BoostError> {
        let bad = |m: String| Err(BoostError::InvalidParams(m));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate must be in (0, 1], got {}", self.learning_rate));
        }
        for (name, v) in [("lambda", self.lambda), ("min_child_hessian", self.min_child_hessian), ("gamma", self.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a non-negative finite number, got {v}"));
            }
        }
        if !self.base_score.is_finite() {
            return bad("base_score must be finite".into());
        }
        if self.growth == Growth::LeafWise && self.max_leaves < 2 {
            return bad(format!("leaf-wise growth needs max_leaves >= 2, got {}", self.max_leaves));
        }
        Ok(())
    }
}

impl Default for BoostParams {
    fn default() -> Self {
        Self::xgb_like()
    }
}

/// Reference to a node inside a [`Tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRef {
    Split(usize),
    Leaf(usize),
}

/// `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitNode {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: NodeRef,
    pub right: NodeRef,
}

/// One regression tree. The root is `splits[0]`, or `leaves[0]` when there are
/// no splits. Children always have larger split indices than their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub splits: Vec<SplitNode>,
    pub leaves: Vec<f64>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree { splits: vec![], leaves: vec![value] }
    }

    /// Raw leaf value (before the learning rate) reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = if self.splits.is_empty() { NodeRef::Leaf(0) } else { NodeRef::Split(0) };
        loop {
            match node {
                NodeRef::Leaf(i) => return self.leaves[i],
                NodeRef::Split(i) => {
                    let s = &self.splits[i];
                    node = if x[s.feature] <= s.threshold { s.left } else { s.right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, n: NodeRef) -> usize {
            match n {
                NodeRef::Leaf(_) => 0,
                NodeRef::Split(i) => 1 + walk(t, t.splits[i].left).max(walk(t, t.splits[i].right)),
            }
        }
        if self.splits.is_empty() {
            0
        } else {
            walk(self, NodeRef::Split(0))
        }
    }

    fn validate(&self, feature_dim: usize) -> Result<(), String> {
        if self.leaves.len() != self.splits.len() + 1 {
            return Err(format!("{} splits need {} leaves, found {}", self.splits.len(), self.splits.len() + 1, self.leaves.len()));
        }
        if let Some(v) = self.leaves.iter().find(|v| !v.is_finite()) {
            return Err(format!("non-finite leaf value {v}"));
        }
        let mut leaf_seen = vec![false; self.leaves.len()];
        let mut split_seen = vec![false; self.splits.len()];
        if let Some(first) = split_seen.first_mut() {
            *first = true;
        }
        for (i, s) in self.splits.iter().enumerate() {
            if s.feature >= feature_dim {
                return Err(format!("split {i} uses feature {} but feature_dim is {feature_dim}", s.feature));
            }
            if !s.threshold.is_finite() || !s.gain.is_finite() {
                return Err(format!("split {i} has a non-finite threshold or gain"));
            }
            for child in [s.left, s.right] {
                match child {
                    NodeRef::Split(j) if j <= i || j >= self.splits.len() => {
                        return Err(format!("split {i} has invalid child split {j}"))
                    }
                    NodeRef::Split(j) if std::mem::replace(&mut split_seen[j], true) => {
                        return Err(format!("split {j} has two parents"))
                    }
                    NodeRef::Leaf(j) if j >= self.leaves.len() => {
                        return Err(format!("split {i} has invalid child leaf {j}"))
                    }
                    NodeRef::Leaf(j) if std::mem::replace(&mut leaf_seen[j], true) => {
                        return Err(format!("leaf {j} has two parents"))
                    }
                    _ => {}
                }
            }
        }
        if !self.splits.is_empty() && (leaf_seen.contains(&false) || split_seen.contains(&false)) {
            return Err("tree has unreachable nodes".into());
        }
        Ok(())
    }
}

/// Additive tree model: `logit(x) = base_score + learning_rate * sum_t tree_t(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub version: u32,
    pub params: BoostParams,
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_dim: usize,
    pub trees: Vec<Tree>,
}

impl TreeEnsemble {
    pub fn empty(params: BoostParams, feature_dim: usize) -> Self {
        TreeEnsemble {
            version: MODEL_FORMAT_VERSION,
            params,
            base_score: params.base_score,
            learning_rate: params.learning_rate,
            feature_dim,
            trees: vec![],
        }
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn validate(&self) -> Result<(), BoostError> {
        let bad = |m: String| Err(BoostError::InvalidModel(m));
        if self.version != MODEL_FORMAT_VERSION {
            return bad(format!("unsupported model version {} (expected {MODEL_FORMAT_VERSION})", self.version));
        }
        if self.feature_dim == 0 {
            return bad("feature_dim must be positive".into());
        }
        if !self.base_score.is_finite() || !self.learning_rate.is_finite() {
            return bad("base_score and learning_rate must be finite".into());
        }
        for (i, t) in self.trees.iter().enumerate() {
            t.validate(self.feature_dim).or_else(|m| bad(format!("tree {i}: {m}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ensemble serializes")
    }

    /// Parses and validates a serialized ensemble.
    pub fn from_json(input: &str) -> Result<Self, BoostError> {
        let model: TreeEnsemble = serde_json::from_str(input)?;
        model.validate()?;
        Ok(model)
    }
}

/// Per-round record of the weighted mean log loss on the training rows.
/// `losses[0]` is before the first tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostHistory {
    pub losses: Vec<f64>,
}

fn check_inputs(x: &EmbeddingMatrix, y: &[Label], weights: Option<&[f64]>) -> Result<(), BoostError> {
    if x.n_rows() == 0 {
        return Err(BoostError::ShapeError("no training rows".into()));
    }
    if x.n_rows() != y.len() {
        return Err(BoostError::ShapeError(format!("{} rows but {} labels", x.n_rows(), y.len())));
    }
    if let Some(w) = weights {
        if w.len() != y.len() {
            return Err(BoostError::ShapeError(format!("{} weights for {} rows", w.len(), y.len())));
        }
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(BoostError::NonFiniteInput(format!("weight {i} must be positive and finite")));
        }
    }
    if let Some(pos) = x.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(BoostError::NonFiniteInput(format!("feature matrix row {}", pos / x.dim())));
    }
    Ok(())
}

fn weighted_logloss(logits: &[f64], y: &[Label], w: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((&z, &label), &wi) in logits.iter().zip(y).zip(w) {
        // log(1 + e^{-z}) for positives, log(1 + e^{z}) for negatives
        let m = if label.is_positive() { -z } else { z };
        let l = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
        num += wi * l;
        den += wi;
    }
    num / den
}

pub fn train_boosted(
    x: &EmbeddingMatrix,
    y: &[Label],
    weights: Option<&[f64]>,
    params: &BoostParams,
) -> Result<TreeEnsemble, BoostError> {
    train_boosted_with_history(x, y, weights, params).map(|(m, _)| m)
}

pub fn train_boosted_with_history(
    x: &EmbeddingMatrix,
    y: &[Label],
    weights: Option<&[f64]>,
    params: &BoostParams,
) -> Result<(TreeEnsemble, BoostHistory), BoostError> {
    params.validate()?;
    check_inputs(x, y, weights)?;
    let n = y.len();
    let w: Vec<f64> = weights.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0; n]);
    let columns = grow::Columns::new(x);

    let mut model = TreeEnsemble::empty(*params, x.dim());
    let mut tree_sums = vec![0.0; n];
    let mut logits = vec![model.base_score; n];
    let mut losses = vec![weighted_logloss(&logits, y, &w)];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];

    for _ in 0..params.n_rounds {
        for i in 0..n {
            let s = sigmoid(logits[i]);
            grad[i] = w[i] * (s - y[i].as_f64());
            hess[i] = w[i] * s * (1.0 - s);
        }
        let tree = grow::grow_tree(&columns, &grad, &hess, params);
        for (i, sum) in tree_sums.iter_mut().enumerate() {
            *sum += tree.predict(x.row(i));
        }
        model.trees.push(tree);
        logits = tree_sums.iter().map(|s| model.base_score + model.learning_rate * s).collect();
        losses.push(weighted_logloss(&logits, y, &w));
    }
    Ok((model, BoostHistory { losses }))
}

/// `sigmoid(base_score + learning_rate * sum of tree outputs)` per row.
pub fn predict_proba(model: &TreeEnsemble, x: &EmbeddingMatrix) -> Result<Vec<f64>, BoostError> {
    if x.dim() != model.feature_dim && x.n_rows() > 0 {
        return Err(BoostError::ShapeError(format!(
            "model expects {} features, matrix has {}",
            model.feature_dim,
            x.dim()
        )));
    }
    Ok(x.rows().map(|r| sigmoid(model.logit(r))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[Vec<f64>]) -> EmbeddingMatrix {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        EmbeddingMatrix::from_rows(ids, rows, rows[0].len(), "test").unwrap()
    }

    #[test]
    fn closed_form_single_leaf_round() {
        let x = matrix(&[vec![0.1], vec![0.2], vec![0.3], vec![0.4]]);
        let y = vec![Label::Positive; 4];
        let params = BoostParams { n_rounds: 1, max_depth: 0, learning_rate: 0.3, lambda: 0.0, ..BoostParams::xgb_like() };
        let m = train_boosted(&x, &y, None, &params).unwrap();
        // G = 4 * -0.5, H = 4 * 0.25, leaf = 2.0, logit = 0.3 * 2.0
        assert_eq!(m.trees[0].leaves, vec![2.0]);
        let p = predict_proba(&m, &x).unwrap();
        let expect = 1.0 / (1.0 + (-0.6f64).exp());
        for v in p {
            assert!((v - expect).abs() < 1e-15);
            assert!((v - 0.645_656_306_225_795).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rounds_predicts_half() {
        let x = matrix(&[vec![1.0], vec![-1.0]]);
        let params = BoostParams { n_rounds: 0, ..BoostParams::default() };
        let m = train_boosted(&x, &[Label::Positive, Label::Negative], None, &params).unwrap();
        assert!(m.trees.is_empty());
        assert_eq!(predict_proba(&m, &x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn hand_built_stump() {
        let stump = Tree {
            splits: vec![SplitNode { feature: 0, threshold: 0.0, gain: 1.0, left: NodeRef::Leaf(0), right: NodeRef::Leaf(1) }],
            leaves: vec![-2.0, 2.0],
        };
        let params = BoostParams { learning_rate: 1.0, ..BoostParams::default() };
        let mut m = TreeEnsemble::empty(params, 2);
        m.trees.push(stump);
        m.validate().unwrap();
        let x = matrix(&[vec![1.0, 5.0], vec![0.0, 5.0], vec![-3.0, 0.0]]);
        let p = predict_proba(&m, &x).unwrap();
        assert!((p[0] - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert!((p[1] - 0.119_202_922_022_117_7).abs() < 1e-15);
        assert!((p[2] - p[1]).abs() == 0.0);
    }

    #[test]
    fn shape_and_input_errors() {
        let x = matrix(&[vec![1.0], vec![2.0]]);
        let p = BoostParams::default();
        assert!(matches!(train_boosted(&x, &[Label::Positive], None, &p), Err(BoostError::ShapeError(_))));
        assert!(matches!(
            train_boosted(&x, &[Label::Positive; 2], Some(&[1.0, 0.0]), &p),
            Err(BoostError::NonFiniteInput(_))
        ));
        let m = TreeEnsemble::empty(p, 3);
        assert!(matches!(predict_proba(&m, &x), Err(BoostError::ShapeError(_))));
    }

    #[test]
    fn separable_line_is_fit_exactly() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 - 9.5]).collect();
        let y: Vec<Label> = rows.iter().map(|r| Label::from(r[0] > 0.0)).collect();
        let params = BoostParams { n_rounds: 10, max_depth: 1, ..BoostParams::xgb_like() };
        let m = train_boosted(&matrix(&rows), &y, None, &params).unwrap();
        let p = predict_proba(&m, &matrix(&rows)).unwrap();
        let correct = p.iter().zip(&y).filter(|(p, y)| (**p >= 0.5) == y.is_positive()).count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i % 5) as f64, (i * 7 % 3) as f64]).collect();
        let y: Vec<Label> = (0..12).map(|i| Label::from(i % 3 == 0)).collect();
        let params = BoostParams { n_rounds: 5, min_child_hessian: 0.0, ..BoostParams::xgb_like() };
        let m = train_boosted(&matrix(&rows), &y, None, &params).unwrap();
        let back = TreeEnsemble::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);

        let mut broken = m.clone();
        broken.version = 2;
        assert!(TreeEnsemble::from_json(&broken.to_json()).is_err());
        let mut broken = m;
        if let Some(t) = broken.trees.iter_mut().find(|t| !t.splits.is_empty()) {
            t.splits[0].feature = 9;
        }
        assert!(matches!(TreeEnsemble::from_json(&broken.to_json()), Err(BoostError::InvalidModel(_))));
    }

    #[test]
    fn cyclic_tree_is_rejected() {
        let t = Tree {
            splits: vec![SplitNode { feature: 0, threshold: 0.0, gain: 0.0, left: NodeRef::Split(0), right: NodeRef::Leaf(0) }],
            leaves: vec![0.0, 0.0],
        };
        assert!(t.validate(1).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(BoostParams { learning_rate: 0.0, ..BoostParams::default() }.validate().is_err());
        assert!(BoostParams { lambda: -1.0, ..BoostParams::default() }.validate().is_err());
        assert!(BoostParams { max_leaves: 1, ..BoostParams::lgbm_like() }.validate().is_err());
        BoostParams::lgbm_like().validate().unwrap();
    }
}
