//! Pretrained word embeddings and the word-vector text format.
//!
//! The text format is one `word v1 ... vd` line per word, optionally
//! preceded by a `V d` header line. Rows are mapped onto the
//! vocabulary: in-vocabulary words get their file vector, missing
//! words get zeros, and `<unk>` gets the mean of the vectors that were
//! loaded.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::tensor::{Scalar, Tensor};
use crate::vocab::{Vocabulary, UNK_ID};

/// Embedding matrix aligned with a vocabulary: row i is the vector for
/// token id i; row 0 is `<unk>`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable<S> {
    pub matrix: Tensor<S>,
    pub trainable: bool,
}

impl<S: Scalar> EmbeddingTable<S> {
    pub fn vocab_size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }
}

/// A malformed line in a word-vector text file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbedFormatError {
    pub line: usize,
    pub reason: String,
}

impl core::fmt::Display for EmbedFormatError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "embeddings line {}: {}", self.line, self.reason)
    }
}

impl core::error::Error for EmbedFormatError {}

/// Parses word-vector text into a frozen table aligned with `vocab`.
pub fn parse_embeddings_text<S: Scalar>(
    text: &str,
    vocab: &Vocabulary,
) -> Result<EmbeddingTable<S>, EmbedFormatError> {
    let mut lines = text.lines().enumerate().peekable();

    // Optional "V d" header: exactly two integer fields.
    let mut dim: Option<usize> = None;
    if let Some((_, first)) = lines.peek() {
        let fields: Vec<&str> = first.split_whitespace().collect();
        if fields.len() == 2 {
            if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                dim = Some(d);
                lines.next();
            }
        }
    }

    let mut matrix: Option<Tensor<S>> = None;
    let mut loaded = 0usize;
    let mut mean: Vec<f64> = Vec::new();
    let mut seen = vec![false; vocab.len()];

    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| EmbedFormatError {
                line: lineno,
                reason: "empty line".to_string(),
            })?;
        let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let values = values.map_err(|_| EmbedFormatError {
            line: lineno,
            reason: "vector component is not a number".to_string(),
        })?;
        let d = *dim.get_or_insert(values.len());
        if values.len() != d {
            return Err(EmbedFormatError {
                line: lineno,
                reason: format_dim_mismatch(d, values.len()),
            });
        }
        if d == 0 {
            return Err(EmbedFormatError {
                line: lineno,
                reason: "zero-dimensional vector".to_string(),
            });
        }

        let id = vocab.id_of(word);
        if id == UNK_ID || seen[id as usize] {
            // out of vocabulary, or duplicate (first occurrence wins)
            continue;
        }
        let matrix = matrix.get_or_insert_with(|| Tensor::zeros(&[vocab.len(), d]));
        let row = &mut matrix.data_mut()[id as usize * d..(id as usize + 1) * d];
        for (slot, v) in row.iter_mut().zip(&values) {
            *slot = S::from_f64(*v);
        }
        seen[id as usize] = true;
        if mean.is_empty() {
            mean = vec![0.0; d];
        }
        for (m, v) in mean.iter_mut().zip(&values) {
            *m += *v;
        }
        loaded += 1;
    }

    let d = dim.unwrap_or(0);
    if d == 0 {
        return Err(EmbedFormatError {
            line: 0,
            reason: "no vectors in file".to_string(),
        });
    }
    let mut matrix = matrix.unwrap_or_else(|| Tensor::zeros(&[vocab.len(), d]));
    if loaded > 0 {
        let unk_row = &mut matrix.data_mut()[..d];
        for (slot, m) in unk_row.iter_mut().zip(&mean) {
            *slot = S::from_f64(*m / loaded as f64);
        }
    }
    Ok(EmbeddingTable {
        matrix,
        trainable: false,
    })
}

fn format_dim_mismatch(expected: usize, got: usize) -> String {
    let mut s = String::new();
    s.push_str("expected ");
    s.push_str(&expected.to_string());
    s.push_str(" components, found ");
    s.push_str(&got.to_string());
    s
}
