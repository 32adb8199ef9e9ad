//! Sentence encoding indexes and Euclidean nearest-neighbor lookup.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{Model, ModelError};
use crate::tensor::Scalar;
use crate::text;

/// N sentence encodings (row-major N x D) with their source sentences.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceIndex<S> {
    dim: usize,
    encodings: Vec<S>,
    sentences: Vec<String>,
}

impl<S: Scalar> SentenceIndex<S> {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "index dimension must be positive");
        SentenceIndex {
            dim,
            encodings: Vec::new(),
            sentences: Vec::new(),
        }
    }

    pub fn from_parts(dim: usize, encodings: Vec<S>, sentences: Vec<String>) -> Option<Self> {
        if dim == 0 || encodings.len() != dim * sentences.len() {
            return None;
        }
        Some(SentenceIndex {
            dim,
            encodings,
            sentences,
        })
    }

    pub fn push(&mut self, encoding: &[S], sentence: String) {
        assert_eq!(encoding.len(), self.dim, "encoding has wrong dimension");
        self.encodings.extend_from_slice(encoding);
        self.sentences.push(sentence);
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.encodings[i * self.dim..(i + 1) * self.dim]
    }

    pub fn sentence(&self, i: usize) -> &str {
        &self.sentences[i]
    }

    pub fn encodings(&self) -> &[S] {
        &self.encodings
    }

    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }
}

/// Encodes raw sentence lines (lowercased and tokenized) into an
/// index. Lines that tokenize to nothing are skipped; the skip count
/// is returned alongside.
pub fn encode_corpus<S: Scalar>(
    model: &Model<S>,
    lines: &[String],
) -> Result<(SentenceIndex<S>, usize), ModelError> {
    let mut index = SentenceIndex::new(model.output_dim());
    let mut skipped = 0usize;
    for line in lines {
        match text::tokenize(&line.to_lowercase()) {
            Ok(sentence) => {
                let ids = model.vocab.encode(&sentence);
                let encoding = model.encode_ids(&ids)?;
                index.push(&encoding, line.clone());
            }
            Err(_) => skipped += 1,
        }
    }
    Ok((index, skipped))
}

/// Euclidean distance in f64, accumulated in index order.
fn distance<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    let mut sum = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x.to_f64() - y.to_f64();
        sum += d * d;
    }
    libm::sqrt(sum)
}

/// The `min(k, N)` nearest rows to `query`, ascending by distance,
/// ties broken by index order. Returns `(row index, distance)` pairs.
pub fn nearest_neighbors<S: Scalar>(
    index: &SentenceIndex<S>,
    query: &[S],
    k: usize,
) -> Vec<(usize, f64)> {
    assert_eq!(query.len(), index.dim(), "query has wrong dimension");
    let mut scored: Vec<(usize, f64)> = (0..index.len())
        .map(|i| (i, distance(index.row(i), query)))
        .collect();
    scored.sort_by(|(ia, da), (ib, db)| da.total_cmp(db).then_with(|| ia.cmp(ib)));
    scored.truncate(k.min(scored.len()));
    scored
}
