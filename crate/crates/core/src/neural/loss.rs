use crate::corpus::{ClassWeights, Label};

/// Scores are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before taking logs.
pub const PROB_CLAMP: f64 = 1e-7;

pub(crate) fn clamp_prob(s1: f64) -> f64 {
    s1.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Unweighted two-class cross-entropy `-t1 ln s1 - (1 - t1) ln(1 - s1)` on the
/// clamped score.
pub fn bce(s1: f64, t1: Label) -> f64 {
    let s = clamp_prob(s1);
    match t1 {
        Label::Positive => -s.ln(),
        Label::Negative => -(1.0 - s).ln(),
    }
}

/// Cross-entropy scaled by the weight of the true class.
pub fn weighted_bce(s1: f64, t1: Label, weights: &ClassWeights) -> f64 {
    weights.of(t1) * bce(s1, t1)
}

/// Mean of [`weighted_bce`] over examples (not normalized by total weight).
pub fn batch_loss(scores: &[f64], labels: &[Label], weights: &ClassWeights) -> f64 {
    assert_eq!(scores.len(), labels.len(), "scores and labels must align");
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().zip(labels).map(|(&s, &t)| weighted_bce(s, t, weights)).sum::<f64>() / scores.len() as f64
}
