use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::{clamp_prob, weighted_bce};
use super::vocab::{TokenSequence, Vocab};
use super::{NeuralError, ProbabilityPair};
use crate::corpus::{ClassWeights, Label};
use crate::sigmoid;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor { shape: shape.to_vec(), data: vec![0.0; shape.iter().product()] }
    }

    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self, NeuralError> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(NeuralError::Shape(format!("shape {shape:?} needs {n} values, got {}", data.len())));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    fn uniform(shape: &[usize], limit: f64, rng: &mut ChaCha8Rng) -> Self {
        let n = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: (0..n).map(|_| rng.random_range(-limit..limit)).collect() }
    }
}

/// All trainable tensors.
///
/// * `token_embedding`: `[vocab, embed_dim]`
/// * `dense_weight`: `[hidden, embed_dim]`, `dense_bias`: `[hidden]`
/// * `head_weight`: `[hidden]`, `head_bias`: `[1]`
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub token_embedding: Tensor,
    pub dense_weight: Tensor,
    pub dense_bias: Tensor,
    pub head_weight: Tensor,
    pub head_bias: Tensor,
}

impl Parameters {
    pub const NAMES: [&'static str; 5] = ["token_embedding", "dense_weight", "dense_bias", "head_weight", "head_bias"];

    pub fn zeros(vocab: usize, embed_dim: usize, hidden: usize) -> Self {
        Parameters {
            token_embedding: Tensor::zeros(&[vocab, embed_dim]),
            dense_weight: Tensor::zeros(&[hidden, embed_dim]),
            dense_bias: Tensor::zeros(&[hidden]),
            head_weight: Tensor::zeros(&[hidden]),
            head_bias: Tensor::zeros(&[1]),
        }
    }

    pub fn zeros_like(other: &Parameters) -> Self {
        let (v, e, h) = other.dims();
        Parameters::zeros(v, e, h)
    }

    /// `(vocab, embed_dim, hidden)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.token_embedding.shape[0], self.token_embedding.shape[1], self.dense_weight.shape[0])
    }

    pub fn is_bias(name: &str) -> bool {
        name.ends_with("_bias")
    }

    pub fn named(&self) -> [(&'static str, &Tensor); 5] {
        [
            ("token_embedding", &self.token_embedding),
            ("dense_weight", &self.dense_weight),
            ("dense_bias", &self.dense_bias),
            ("head_weight", &self.head_weight),
            ("head_bias", &self.head_bias),
        ]
    }

    pub fn named_mut(&mut self) -> [(&'static str, &mut Tensor); 5] {
        [
            ("token_embedding", &mut self.token_embedding),
            ("dense_weight", &mut self.dense_weight),
            ("dense_bias", &mut self.dense_bias),
            ("head_weight", &mut self.head_weight),
            ("head_bias", &mut self.head_bias),
        ]
    }

    /// Checks the five tensors describe one consistent network.
    pub fn check_shapes(&self) -> Result<(), NeuralError> {
        let bad = |m: String| Err(NeuralError::Shape(m));
        if self.token_embedding.shape.len() != 2 || self.dense_weight.shape.len() != 2 {
            return bad("embedding and dense weight must be matrices".into());
        }
        let (v, e, h) = self.dims();
        if v < 2 || e == 0 || h == 0 {
            return bad(format!("degenerate dimensions vocab={v} embed={e} hidden={h}"));
        }
        let expect: [(&str, &[usize]); 5] =
            [("token_embedding", &[v, e]), ("dense_weight", &[h, e]), ("dense_bias", &[h]), ("head_weight", &[h]), ("head_bias", &[1])];
        for ((name, t), (_, want)) in self.named().into_iter().zip(expect) {
            if t.shape != want || t.data.len() != want.iter().product::<usize>() {
                return bad(format!("{name} has shape {:?}, expected {want:?}", t.shape));
            }
        }
        Ok(())
    }
}

/// Vocabulary, sequence length and weights of one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralClassifier {
    pub vocab: Vocab,
    pub max_len: usize,
    pub params: Parameters,
}

struct Activations {
    tokens: Vec<u32>,
    pooled: Vec<f64>,
    hidden: Vec<f64>,
    s1: f64,
}

impl NeuralClassifier {
    /// Seeded uniform initialization: embeddings in `±0.1`, dense and head
    /// weights Glorot-uniform, biases zero, padding row zero.
    pub fn new(vocab: Vocab, max_len: usize, embed_dim: usize, hidden: usize, seed: u64) -> Result<Self, NeuralError> {
        if max_len == 0 || embed_dim == 0 || hidden == 0 {
            return Err(NeuralError::Shape("max_len, embed_dim and hidden must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut token_embedding = Tensor::uniform(&[vocab.len(), embed_dim], 0.1, &mut rng);
        token_embedding.data[..embed_dim].fill(0.0);
        let dense_limit = (6.0 / (embed_dim + hidden) as f64).sqrt();
        let head_limit = (6.0 / (hidden + 1) as f64).sqrt();
        let params = Parameters {
            token_embedding,
            dense_weight: Tensor::uniform(&[hidden, embed_dim], dense_limit, &mut rng),
            dense_bias: Tensor::zeros(&[hidden]),
            head_weight: Tensor::uniform(&[hidden], head_limit, &mut rng),
            head_bias: Tensor::zeros(&[1]),
        };
        Ok(NeuralClassifier { vocab, max_len, params })
    }

    pub fn from_parts(vocab: Vocab, max_len: usize, params: Parameters) -> Result<Self, NeuralError> {
        params.check_shapes()?;
        if params.dims().0 != vocab.len() {
            return Err(NeuralError::Shape(format!(
                "embedding has {} rows but vocabulary has {} tokens",
                params.dims().0,
                vocab.len()
            )));
        }
        if max_len == 0 {
            return Err(NeuralError::Shape("max_len must be positive".into()));
        }
        Ok(NeuralClassifier { vocab, max_len, params })
    }

    pub fn tokenize(&self, text: &str) -> TokenSequence {
        super::vocab::tokenize(text, &self.vocab, self.max_len)
    }

    fn activations(&self, index: usize, seq: &TokenSequence) -> Result<Activations, NeuralError> {
        let p = &self.params;
        let (vocab, e, h) = p.dims();
        let tokens: Vec<u32> = seq.non_pad().collect();
        if tokens.is_empty() {
            return Err(NeuralError::EmptySequence(index));
        }
        let mut pooled = vec![0.0; e];
        for &t in &tokens {
            if t as usize >= vocab {
                return Err(NeuralError::Shape(format!("token id {t} out of range for vocabulary of {vocab}")));
            }
            let row = &p.token_embedding.data[t as usize * e..(t as usize + 1) * e];
            pooled.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        let inv = 1.0 / tokens.len() as f64;
        pooled.iter_mut().for_each(|a| *a *= inv);

        let hidden: Vec<f64> = (0..h)
            .map(|j| {
                let w = &p.dense_weight.data[j * e..(j + 1) * e];
                let z: f64 = w.iter().zip(&pooled).map(|(a, b)| a * b).sum::<f64>() + p.dense_bias.data[j];
                z.tanh()
            })
            .collect();
        let logit: f64 = p.head_weight.data.iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>() + p.head_bias.data[0];
        Ok(Activations { tokens, pooled, hidden, s1: sigmoid(logit) })
    }

    /// Positive-class probabilities for a batch; inference is deterministic and
    /// each example is independent of the rest of the batch.
    pub fn forward(&self, batch: &[TokenSequence]) -> Result<Vec<ProbabilityPair>, NeuralError> {
        batch
            .iter()
            .enumerate()
            .map(|(i, s)| self.activations(i, s).map(|a| ProbabilityPair::new(a.s1)))
            .collect()
    }

    pub fn predict_texts<'a>(&self, texts: impl IntoIterator<Item = &'a str>) -> Result<Vec<f64>, NeuralError> {
        let seqs: Vec<TokenSequence> = texts.into_iter().map(|t| self.tokenize(t)).collect();
        Ok(self.forward(&seqs)?.into_iter().map(|p| p.s1).collect())
    }

    /// Mean weighted cross-entropy over the batch and its exact gradient with
    /// respect to every parameter. Examples whose score is clamped contribute
    /// zero gradient, matching the flat clamp.
    pub fn loss_and_gradients(
        &self,
        batch: &[TokenSequence],
        labels: &[Label],
        weights: &ClassWeights,
    ) -> Result<(f64, Parameters), NeuralError> {
        if batch.len() != labels.len() {
            return Err(NeuralError::Shape(format!("{} sequences but {} labels", batch.len(), labels.len())));
        }
        let p = &self.params;
        let (_, e, h) = p.dims();
        let mut grads = Parameters::zeros_like(p);
        if batch.is_empty() {
            return Ok((0.0, grads));
        }
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut d_pooled = vec![0.0; e];
        let mut d_pre = vec![0.0; h];
        for (i, (seq, &label)) in batch.iter().zip(labels).enumerate() {
            let act = self.activations(i, seq)?;
            loss += weighted_bce(act.s1, label, weights);
            if clamp_prob(act.s1) != act.s1 {
                continue;
            }
            let d_logit = scale * weights.of(label) * (act.s1 - label.as_f64());

            grads.head_bias.data[0] += d_logit;
            for j in 0..h {
                grads.head_weight.data[j] += d_logit * act.hidden[j];
                d_pre[j] = d_logit * p.head_weight.data[j] * (1.0 - act.hidden[j] * act.hidden[j]);
                grads.dense_bias.data[j] += d_pre[j];
            }
            d_pooled.fill(0.0);
            for j in 0..h {
                let w = &p.dense_weight.data[j * e..(j + 1) * e];
                let gw = &mut grads.dense_weight.data[j * e..(j + 1) * e];
                for k in 0..e {
                    gw[k] += d_pre[j] * act.pooled[k];
                    d_pooled[k] += d_pre[j] * w[k];
                }
            }
            let inv = 1.0 / act.tokens.len() as f64;
            for &t in &act.tokens {
                let row = &mut grads.token_embedding.data[t as usize * e..(t as usize + 1) * e];
                row.iter_mut().zip(&d_pooled).for_each(|(g, d)| *g += d * inv);
            }
        }
        Ok((loss * scale, grads))
    }
}

/// Free-function form of [`NeuralClassifier::forward`].
pub fn forward(model: &NeuralClassifier, batch: &[TokenSequence]) -> Result<Vec<ProbabilityPair>, NeuralError> {
    model.forward(batch)
}
