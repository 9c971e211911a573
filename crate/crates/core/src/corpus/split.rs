use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{dataset_stats, CorpusError, Dataset, Label};
use crate::hashing::hash64;

/// Written next to the two split files so a partition can be audited later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub fraction: f64,
    pub train_ids_hash: String,
    pub val_ids_hash: String,
}

impl SplitManifest {
    pub fn describe(train: &Dataset, val: &Dataset, fraction: f64, seed: u64) -> Self {
        SplitManifest {
            seed,
            fraction,
            train_ids_hash: ids_digest(train.ids()),
            val_ids_hash: ids_digest(val.ids()),
        }
    }
}

/// SHA-256 (hex) over the sorted ids, newline-terminated. Independent of order.
pub fn ids_digest<'a>(ids: impl IntoIterator<Item = &'a str>) -> String {
    let mut ids: Vec<&str> = ids.into_iter().collect();
    ids.sort_unstable();
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Number of training examples per class: `floor(f * n_c)`, then one extra to
/// the class with the largest fractional remainder until the total reaches
/// `round(f * total)`.
pub(crate) fn train_quota(n_positive: usize, n_negative: usize, fraction: f64) -> (usize, usize) {
    // Guard against 0.85 * 20 landing at 16.999999999999996.
    const EPS: f64 = 1e-9;
    let exact = |n: usize| fraction * n as f64;
    let floor = |n: usize| ((exact(n) + EPS).floor() as usize).min(n);
    let rem = |n: usize| (exact(n) - floor(n) as f64).max(0.0);
    let mut quota = [floor(n_positive), floor(n_negative)];
    let sizes = [n_positive, n_negative];
    let target = ((exact(n_positive + n_negative) + EPS).round() as usize).min(n_positive + n_negative);
    // positive wins ties on equal remainders
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| rem(sizes[b]).partial_cmp(&rem(sizes[a])).unwrap().then(a.cmp(&b)));
    for &c in order.iter().cycle().take(4) {
        if quota[0] + quota[1] >= target {
            break;
        }
        if quota[c] < sizes[c] {
            quota[c] += 1;
        }
    }
    (quota[0], quota[1])
}

/// Stratified train/validation partition.
///
/// Within each class examples are ranked by a seeded hash of their id, so the
/// partition depends only on the set of ids, the fraction and the seed, never
/// on file order. Both outputs keep the input's relative order.
pub fn stratified_split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let counts = dataset_stats(dataset);
    for label in [Label::Positive, Label::Negative] {
        if counts.of(label) == 0 {
            return Err(CorpusError::DegenerateClass(label));
        }
    }
    let (q_pos, q_neg) = train_quota(counts.n_positive, counts.n_negative, train_fraction);

    let mut in_train = std::collections::HashSet::with_capacity(q_pos + q_neg);
    for (label, quota) in [(Label::Positive, q_pos), (Label::Negative, q_neg)] {
        let mut ranked: Vec<(u64, &str)> = dataset
            .examples()
            .iter()
            .filter(|e| e.label == label)
            .map(|e| (hash64(e.id.as_bytes(), seed), e.id.as_str()))
            .collect();
        ranked.sort_unstable();
        in_train.extend(ranked.into_iter().take(quota).map(|(_, id)| id.to_string()));
    }

    let train = dataset.filtered(format!("{}.train", dataset.name), |e| in_train.contains(&e.id));
    let val = dataset.filtered(format!("{}.val", dataset.name), |e| !in_train.contains(&e.id));
    Ok((train, val))
}
