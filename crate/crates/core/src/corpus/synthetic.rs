//! Seeded synthetic corpora standing in for the non-distributable shared-task data.
//!
//! Texts are sequences of Urdu-script pseudo-words drawn from three disjoint
//! pools: positive markers, negative markers and neutral filler. With
//! `marker_rate = 1` and `cross_rate = 0` every example carries at least one
//! marker of its own class and none of the other, so the marker-count score
//! `#positive_markers - #negative_markers` separates the classes with margin
//! at least one. The generator measures that margin on what it produced.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, Label, LabeledExample, Task};

const LETTERS: [char; 28] = [
    'ا', 'ب', 'پ', 'ت', 'ٹ', 'ج', 'چ', 'ح', 'خ', 'د', 'ڈ', 'ر', 'ز', 'س', 'ش', 'ص', 'ط', 'ع', 'غ', 'ف', 'ق', 'ک',
    'گ', 'ل', 'م', 'ن', 'و', 'ی',
];

/// Deterministic pseudo-word; distinct `code`s give distinct words.
fn pseudo_word(code: usize) -> String {
    let mut n = code;
    let mut w = String::new();
    loop {
        w.push(LETTERS[n % LETTERS.len()]);
        n /= LETTERS.len();
        if n == 0 {
            break;
        }
    }
    // pad so every word has at least 3 letters (and so at least one trigram)
    while w.chars().count() < 3 {
        w.push('ہ');
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub name: String,
    pub task: Task,
    pub n_positive: usize,
    pub n_negative: usize,
    pub seed: u64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub vocab_markers: usize,
    pub vocab_filler: usize,
    /// Fraction of examples that receive a marker of their own class.
    pub marker_rate: f64,
    /// Probability an example also receives a marker of the other class.
    pub cross_rate: f64,
    /// Prefix for generated ids, so train/test files can share an id space.
    pub id_prefix: String,
}

impl SyntheticSpec {
    pub fn separable(name: &str, task: Task, n_positive: usize, n_negative: usize, seed: u64) -> Self {
        SyntheticSpec {
            name: name.to_string(),
            task,
            n_positive,
            n_negative,
            seed,
            min_tokens: 4,
            max_tokens: 12,
            vocab_markers: 6,
            vocab_filler: 40,
            marker_rate: 1.0,
            cross_rate: 0.0,
            id_prefix: format!("{name}-"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dataset: Dataset,
    pub positive_markers: Vec<String>,
    pub negative_markers: Vec<String>,
    /// Minimum over examples of `y * (#pos markers - #neg markers)` with
    /// `y = ±1`; positive means the corpus is separable by that score.
    pub margin: i64,
}

impl SyntheticCorpus {
    pub fn is_separable(&self) -> bool {
        self.margin > 0
    }
}

/// `y * marker score` per example, computed from the texts alone.
pub fn marker_margin(dataset: &Dataset, positive_markers: &[String], negative_markers: &[String]) -> i64 {
    dataset
        .examples()
        .iter()
        .map(|e| {
            let score: i64 = e
                .text
                .split(' ')
                .map(|t| {
                    i64::from(positive_markers.iter().any(|m| m == t))
                        - i64::from(negative_markers.iter().any(|m| m == t))
                })
                .sum();
            if e.label.is_positive() {
                score
            } else {
                -score
            }
        })
        .min()
        .unwrap_or(0)
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    assert!(spec.min_tokens >= 1 && spec.max_tokens >= spec.min_tokens, "token range");
    assert!(spec.vocab_markers >= 1 && spec.vocab_filler >= 1, "pool sizes");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pool = |base: usize, n: usize| (0..n).map(|i| pseudo_word(base + i)).collect::<Vec<_>>();
    // bases far apart keep the three pools disjoint
    let positive_markers = pool(1000, spec.vocab_markers);
    let negative_markers = pool(3000, spec.vocab_markers);
    let filler = pool(5000, spec.vocab_filler);

    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Positive, spec.n_positive)
        .chain(std::iter::repeat_n(Label::Negative, spec.n_negative))
        .collect();
    labels.shuffle(&mut rng);

    let mut examples = Vec::with_capacity(labels.len());
    for (i, label) in labels.into_iter().enumerate() {
        let n = rng.random_range(spec.min_tokens..=spec.max_tokens);
        let mut words: Vec<&str> = (0..n).map(|_| filler.choose(&mut rng).unwrap().as_str()).collect();
        let (own, other) = match label {
            Label::Positive => (&positive_markers, &negative_markers),
            Label::Negative => (&negative_markers, &positive_markers),
        };
        if rng.random_bool(spec.marker_rate) {
            let at = rng.random_range(0..=words.len());
            words.insert(at, own.choose(&mut rng).unwrap());
        }
        if rng.random_bool(spec.cross_rate) {
            let at = rng.random_range(0..=words.len());
            words.insert(at, other.choose(&mut rng).unwrap());
        }
        examples.push(LabeledExample {
            id: format!("{}{:05}", spec.id_prefix, i),
            text: words.join(" "),
            label,
        });
    }
    let dataset = Dataset::new(spec.name.clone(), spec.task, examples).expect("generated ids are unique");
    let margin = marker_margin(&dataset, &positive_markers, &negative_markers);
    SyntheticCorpus { dataset, positive_markers, negative_markers, margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::dataset_stats;

    #[test]
    fn separable_spec_has_positive_margin() {
        let c = generate(&SyntheticSpec::separable("s", Task::Threatening, 20, 100, 3));
        assert!(c.is_separable());
        assert_eq!(c.margin, 1);
        assert_eq!(dataset_stats(&c.dataset).n_positive, 20);
    }

    #[test]
    fn generation_is_seeded() {
        let spec = SyntheticSpec::separable("s", Task::Abusive, 10, 10, 9);
        assert_eq!(generate(&spec).dataset, generate(&spec).dataset);
        let other = SyntheticSpec { seed: 10, ..spec };
        assert_ne!(generate(&other).dataset, generate(&SyntheticSpec { seed: 9, ..other.clone() }).dataset);
    }

    #[test]
    fn pools_are_disjoint() {
        let words: std::collections::HashSet<String> = (0..8000).map(pseudo_word).collect();
        assert_eq!(words.len(), 8000);
    }
}
