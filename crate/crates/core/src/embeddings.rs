//! Fixed-dimension sentence vectors for the boosted baseline.
//!
//! Two providers sit behind [`EmbeddingProvider`]: a deterministic signed
//! character-trigram hasher, and a lookup table of vectors computed offline by
//! an external sentence encoder and stored one record per line as
//! `id<TAB>v1 v2 ... vd`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, LabeledExample};
use crate::hashing::hash64;

pub const DEFAULT_HASH_DIM: usize = 256;
pub const DEFAULT_PRECOMPUTED_DIM: usize = 1024;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no embedding for id {0:?}")]
    MissingEmbedding(String),
    #[error("line {line}: vector has {found} values, expected {expected}")]
    RaggedEmbeddings { line: usize, expected: usize, found: usize },
    #[error("line {line}: non-finite value in vector for {id:?}")]
    NonFiniteEmbedding { line: usize, id: String },
    #[error("line {line}: id {id:?} appears twice")]
    DuplicateEmbedding { line: usize, id: String },
    #[error("embedding failed for example {id:?}: {reason}")]
    BatchEmbedError { id: String, reason: String },
    #[error("invalid embedding matrix: {0}")]
    Shape(String),
}

/// Row-aligned vectors: row `i` belongs to `ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    data: Vec<f64>,
    dim: usize,
    pub provider_tag: String,
}

impl EmbeddingMatrix {
    pub fn new(ids: Vec<String>, data: Vec<f64>, dim: usize, provider_tag: impl Into<String>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::Shape("dimension must be positive".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(EmbeddingError::Shape(format!(
                "{} values for {} rows of dimension {dim}",
                data.len(),
                ids.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::Shape(format!("non-finite value in row {}", pos / dim)));
        }
        Ok(EmbeddingMatrix { ids, data, dim, provider_tag: provider_tag.into() })
    }

    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f64>], dim: usize, provider_tag: impl Into<String>) -> Result<Self, EmbeddingError> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(EmbeddingError::RaggedEmbeddings { line: i + 1, expected: dim, found: r.len() });
        }
        Self::new(ids, rows.concat(), dim, provider_tag)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Anything that can turn one example into a fixed-length vector.
pub trait EmbeddingProvider: Sync {
    fn tag(&self) -> String;
    fn dim(&self) -> usize;
    fn embed(&self, example: &LabeledExample) -> Result<Vec<f64>, EmbeddingError>;
}

/// Signed feature hashing of character trigrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashingEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashingEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        if dim < 2 {
            return Err(EmbeddingError::Shape(format!("hashing dimension must be at least 2, got {dim}")));
        }
        Ok(HashingEmbedder { dim, seed })
    }

    /// Bucket index and sign for one trigram.
    pub fn bucket(&self, trigram: &str) -> (usize, f64) {
        let bucket_seed = self.seed.wrapping_mul(2);
        let sign_seed = bucket_seed.wrapping_add(1);
        let idx = (hash64(trigram.as_bytes(), bucket_seed) % self.dim as u64) as usize;
        let sign = if hash64(trigram.as_bytes(), sign_seed) & 1 == 0 { 1.0 } else { -1.0 };
        (idx, sign)
    }

    pub fn embed_text(&self, text: &str) -> Vec<f64> {
        hash_embed(text, self.dim, self.seed)
    }
}

/// Every window of three consecutive characters, spaces included.
pub fn char_trigrams(text: &str) -> Vec<&str> {
    let starts: Vec<usize> = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len())).collect();
    starts.windows(4).map(|w| &text[w[0]..w[3]]).collect()
}

/// Deterministic signed trigram hashing, L2-normalized unless every bucket
/// cancels to zero (or the text has fewer than three characters).
///
/// Panics if `dim < 2`; use [`HashingEmbedder::new`] for a checked constructor.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 2, "hash_embed needs dim >= 2");
    let h = HashingEmbedder { dim, seed };
    let mut v = vec![0.0; dim];
    for tri in char_trigrams(text) {
        let (idx, sign) = h.bucket(tri);
        v[idx] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

impl EmbeddingProvider for HashingEmbedder {
    fn tag(&self) -> String {
        format!("hashing-trigram(dim={},seed={})", self.dim, self.seed)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, example: &LabeledExample) -> Result<Vec<f64>, EmbeddingError> {
        Ok(self.embed_text(&example.text))
    }
}

/// Vectors keyed by example id, as produced offline.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedEmbeddings {
    vectors: HashMap<String, Vec<f64>>,
    dim: usize,
    source: String,
}

impl PrecomputedEmbeddings {
    pub fn parse(input: &str, source: &str) -> Result<Self, EmbeddingError> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, raw) in input.lines().enumerate() {
            let line = i + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() {
                continue;
            }
            let (id, values) = raw
                .split_once('\t')
                .ok_or_else(|| EmbeddingError::Parse { line, message: "expected id<TAB>values".into() })?;
            if id.is_empty() {
                return Err(EmbeddingError::Parse { line, message: "empty id".into() });
            }
            let mut vec = Vec::new();
            for tok in values.split_ascii_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| EmbeddingError::Parse { line, message: format!("bad number {tok:?}") })?;
                if !v.is_finite() {
                    return Err(EmbeddingError::NonFiniteEmbedding { line, id: id.to_string() });
                }
                vec.push(v);
            }
            if vec.is_empty() {
                return Err(EmbeddingError::Parse { line, message: "empty vector".into() });
            }
            match dim {
                None => dim = Some(vec.len()),
                Some(d) if d != vec.len() => {
                    return Err(EmbeddingError::RaggedEmbeddings { line, expected: d, found: vec.len() })
                }
                Some(_) => {}
            }
            if vectors.insert(id.to_string(), vec).is_some() {
                return Err(EmbeddingError::DuplicateEmbedding { line, id: id.to_string() });
            }
        }
        Ok(PrecomputedEmbeddings { vectors, dim: dim.unwrap_or(0), source: source.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let input = fs::read_to_string(path).map_err(|source| EmbeddingError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&input, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    /// Rows in exactly the order of `expected_ids`.
    pub fn select(&self, expected_ids: &[String]) -> Result<EmbeddingMatrix, EmbeddingError> {
        let mut data = Vec::with_capacity(expected_ids.len() * self.dim);
        for id in expected_ids {
            let v = self.get(id).ok_or_else(|| EmbeddingError::MissingEmbedding(id.clone()))?;
            data.extend_from_slice(v);
        }
        if expected_ids.is_empty() {
            return EmbeddingMatrix::new(vec![], vec![], self.dim.max(1), self.tag());
        }
        EmbeddingMatrix::new(expected_ids.to_vec(), data, self.dim, self.tag())
    }
}

impl EmbeddingProvider for PrecomputedEmbeddings {
    fn tag(&self) -> String {
        format!("precomputed({})", self.source)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, example: &LabeledExample) -> Result<Vec<f64>, EmbeddingError> {
        self.get(&example.id)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| EmbeddingError::MissingEmbedding(example.id.clone()))
    }
}

/// Reads a precomputed vector file and reorders it to `expected_ids`.
pub fn load_precomputed(path: &Path, expected_ids: &[String]) -> Result<EmbeddingMatrix, EmbeddingError> {
    PrecomputedEmbeddings::load(path)?.select(expected_ids)
}

/// Writes `matrix` in the precomputed format. Floats use the shortest
/// representation that parses back to the identical value.
pub fn save_precomputed(matrix: &EmbeddingMatrix, path: &Path) -> Result<(), EmbeddingError> {
    let mut out = String::new();
    for (id, row) in matrix.ids().iter().zip(matrix.rows()) {
        if id.contains(['\t', '\n', '\r']) {
            return Err(EmbeddingError::Shape(format!("id {id:?} contains a tab or newline")));
        }
        out.push_str(id);
        out.push('\t');
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v:?}").expect("write to String");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| EmbeddingError::Io { path: path.to_path_buf(), source })
}

/// Embeds every example of `dataset`; row `i` is example `i`.
pub fn embed_batch(provider: &dyn EmbeddingProvider, dataset: &Dataset) -> Result<EmbeddingMatrix, EmbeddingError> {
    let dim = provider.dim();
    let rows: Vec<Vec<f64>> = dataset
        .examples()
        .par_iter()
        .map(|ex| {
            let v = provider
                .embed(ex)
                .map_err(|e| EmbeddingError::BatchEmbedError { id: ex.id.clone(), reason: e.to_string() })?;
            if v.len() != dim {
                return Err(EmbeddingError::BatchEmbedError {
                    id: ex.id.clone(),
                    reason: format!("provider returned {} values, expected {dim}", v.len()),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbeddingError::BatchEmbedError { id: ex.id.clone(), reason: "non-finite value".into() });
            }
            Ok(v)
        })
        .collect::<Result<_, _>>()?;
    let ids = dataset.examples().iter().map(|e| e.id.clone()).collect();
    EmbeddingMatrix::new(ids, rows.concat(), dim.max(1), provider.tag())
}
