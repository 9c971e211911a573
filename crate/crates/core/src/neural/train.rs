use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::NeuralClassifier;
use super::optim::{optimizer_step, AdamState};
use super::vocab::TokenSequence;
use super::{NeuralError, Selection, TrainConfig};
use crate::corpus::{Dataset, Label};
use crate::metrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean weighted loss over the epoch's batches, each computed before its update.
    pub train_loss: f64,
    pub val_f1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: NeuralClassifier,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose parameters `model` holds.
    pub selected_epoch: usize,
}

/// Epoch with the highest validation F1, earliest on ties. `None` when no
/// epoch has a validation score.
pub fn select_epoch(history: &[EpochRecord]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for r in history {
        if let Some(f) = r.val_f1 {
            if best.is_none_or(|(_, b)| f > b) {
                best = Some((r.epoch, f));
            }
        }
    }
    best.map(|(e, _)| e)
}

fn encode(model: &NeuralClassifier, data: &Dataset) -> (Vec<TokenSequence>, Vec<Label>) {
    data.examples().iter().map(|e| (model.tokenize(&e.text), e.label)).unzip()
}

fn validation_f1(model: &NeuralClassifier, seqs: &[TokenSequence], labels: &[Label]) -> Result<f64, NeuralError> {
    let scores: Vec<f64> = model.forward(seqs)?.into_iter().map(|p| p.s1).collect();
    let cm = metrics::confusion(&scores, labels, metrics::DEFAULT_THRESHOLD)
        .map_err(|e| NeuralError::Shape(e.to_string()))?;
    Ok(metrics::f1(&cm))
}

/// Mini-batch training for `config.epochs` epochs.
///
/// Batch order is a fresh seeded permutation each epoch drawn from one RNG
/// stream, so the first `k` epochs of a longer run are identical to a
/// `k`-epoch run with the same seed. With [`Selection::BestValidation`] the
/// parameters after the best-scoring epoch are returned; with
/// [`Selection::LastEpoch`] the final ones are (a validation set, if given,
/// is still scored for the history).
pub fn train_classifier(
    mut model: NeuralClassifier,
    train: &Dataset,
    val: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<TrainOutcome, NeuralError> {
    config.validate()?;
    if train.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    if config.selection == Selection::BestValidation && val.is_none_or(Dataset::is_empty) {
        return Err(NeuralError::MissingValidation);
    }
    let (seqs, labels) = encode(&model, train);
    let val_enc = val.filter(|v| !v.is_empty()).map(|v| encode(&model, v));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(&model.params);
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, super::model::Parameters)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<TokenSequence> = chunk.iter().map(|&i| seqs[i].clone()).collect();
            let batch_labels: Vec<Label> = chunk.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = model.loss_and_gradients(&batch, &batch_labels, &config.class_weights)?;
            loss_sum += loss * chunk.len() as f64;
            optimizer_step(&mut model.params, &grads, &mut state, config)?;
        }
        let val_f1 = match &val_enc {
            Some((vs, vl)) => Some(validation_f1(&model, vs, vl)?),
            None => None,
        };
        log::debug!("epoch {epoch}: train loss {:.6} val f1 {:?}", loss_sum / seqs.len() as f64, val_f1);
        history.push(EpochRecord { epoch, train_loss: loss_sum / seqs.len() as f64, val_f1 });
        if config.selection == Selection::BestValidation {
            let f = val_f1.expect("validation set checked above");
            if best.as_ref().is_none_or(|(b, _, _)| f > *b) {
                best = Some((f, epoch, model.params.clone()));
            }
        }
    }

    let selected_epoch = match (config.selection, best) {
        (Selection::BestValidation, Some((_, epoch, params))) => {
            model.params = params;
            epoch
        }
        _ => config.epochs,
    };
    debug_assert!(config.selection != Selection::BestValidation || select_epoch(&history) == Some(selected_epoch));
    Ok(TrainOutcome { model, history, selected_epoch })
}
