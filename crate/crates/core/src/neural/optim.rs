use super::model::Parameters;
use super::{NeuralError, TrainConfig};

/// First and second moment estimates plus the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Parameters,
    pub v: Parameters,
}

impl AdamState {
    pub fn new(params: &Parameters) -> Self {
        AdamState { step: 0, m: Parameters::zeros_like(params), v: Parameters::zeros_like(params) }
    }
}

/// One bias-corrected adaptive-moment update with decoupled weight decay on a
/// flat slice. `step` is the 1-based index of this update.
#[allow(clippy::too_many_arguments)]
pub fn adamw_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    config: &TrainConfig,
    decay: bool,
) {
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powf(step as f64);
    let c2 = 1.0 - b2.powf(step as f64);
    let wd = if decay { config.weight_decay } else { 0.0 };
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= config.learning_rate * (m_hat / (v_hat.sqrt() + config.epsilon) + wd * *p);
    }
}

/// Applies one update to every tensor. Bias tensors are not decayed. A
/// non-finite gradient aborts before anything is modified.
pub fn optimizer_step(
    params: &mut Parameters,
    grads: &Parameters,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<(), NeuralError> {
    for ((name, g), (_, p)) in grads.named().into_iter().zip(params.named()) {
        if g.shape != p.shape {
            return Err(NeuralError::Shape(format!("gradient for {name} has shape {:?}, parameter {:?}", g.shape, p.shape)));
        }
        if g.data.iter().any(|x| !x.is_finite()) {
            return Err(NeuralError::NonFiniteGradient(name.to_string()));
        }
    }
    if state.m.dims() != params.dims() || state.v.dims() != params.dims() {
        return Err(NeuralError::Shape("optimizer state does not match parameters".into()));
    }
    state.step += 1;
    let step = state.step;
    let grads = grads.named();
    let ms = state.m.named_mut();
    let vs = state.v.named_mut();
    for ((((name, p), (_, g)), (_, m)), (_, v)) in params.named_mut().into_iter().zip(grads).zip(ms).zip(vs) {
        adamw_update(&mut p.data, &g.data, &mut m.data, &mut v.data, step, config, !Parameters::is_bias(name));
    }
    Ok(())
}
