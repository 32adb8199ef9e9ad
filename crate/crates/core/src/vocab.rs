//! Token vocabulary with dense ids.
//!
//! Id 0 is reserved for `<unk>`. Remaining ids are assigned by
//! descending corpus frequency, ties broken lexicographically, so the
//! mapping is a pure function of the corpus token multiset.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::Sentence;

pub const UNK_TOKEN: &str = "<unk>";
pub const UNK_ID: u32 = 0;

/// Commutative token-frequency map; counts from concurrent workers can
/// be merged before vocabulary assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenCounts {
    counts: BTreeMap<String, u64>,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count_sentence(&mut self, sentence: &Sentence) {
        for token in sentence.tokens() {
            *self.counts.entry(token.clone()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (token, n) in other.counts {
            *self.counts.entry(token).or_insert(0) += n;
        }
    }

    pub fn into_vocabulary(self, min_count: u64) -> Vocabulary {
        assert!(min_count >= 1, "min_count must be >= 1");
        let mut kept: Vec<(String, u64)> = self
            .counts
            .into_iter()
            .filter(|(token, n)| *n >= min_count && token != UNK_TOKEN)
            .collect();
        kept.sort_by(|(ta, na), (tb, nb)| nb.cmp(na).then_with(|| ta.cmp(tb)));

        let mut id_to_token = Vec::with_capacity(kept.len() + 1);
        let mut counts = Vec::with_capacity(kept.len() + 1);
        id_to_token.push(UNK_TOKEN.to_string());
        counts.push(0);
        for (token, n) in kept {
            id_to_token.push(token);
            counts.push(n);
        }
        Vocabulary::from_parts(id_to_token, counts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: BTreeMap<String, u32>,
    id_to_token: Vec<String>,
    counts: Vec<u64>,
}

impl Vocabulary {
    fn from_parts(id_to_token: Vec<String>, counts: Vec<u64>) -> Self {
        debug_assert_eq!(id_to_token.len(), counts.len());
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(id, token)| (token.clone(), id as u32))
            .collect();
        Vocabulary {
            token_to_id,
            id_to_token,
            counts,
        }
    }

    /// Builds a vocabulary from a corpus of sentences. Tokens seen fewer
    /// than `min_count` times map to `<unk>` at encoding time.
    pub fn build<'a, I>(corpus: I, min_count: u64) -> Vocabulary
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let mut counts = TokenCounts::new();
        for sentence in corpus {
            counts.count_sentence(sentence);
        }
        counts.into_vocabulary(min_count)
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always holds at least <unk>
    }

    pub fn id_of(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token_of(&self, id: u32) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn count_of(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps each token to its id; out-of-vocabulary tokens become
    /// `<unk>`. Length is preserved.
    pub fn encode(&self, sentence: &Sentence) -> Vec<u32> {
        sentence.tokens().iter().map(|t| self.id_of(t)).collect()
    }

    /// Inverse of `encode` up to `<unk>` replacement.
    pub fn decode(&self, ids: &[u32]) -> Sentence {
        Sentence(ids.iter().map(|&id| self.token_of(id).to_string()).collect())
    }

    /// One `token<TAB>count` line per id; line number equals id.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (token, count) in self.id_to_token.iter().zip(&self.counts) {
            out.push_str(token);
            out.push('\t');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Vocabulary, VocabFormatError> {
        let mut id_to_token = Vec::new();
        let mut counts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let (token, count) = line
                .split_once('\t')
                .ok_or(VocabFormatError::MissingTab { line: lineno + 1 })?;
            let count: u64 = count
                .parse()
                .map_err(|_| VocabFormatError::BadCount { line: lineno + 1 })?;
            if lineno == 0 && token != UNK_TOKEN {
                return Err(VocabFormatError::MissingUnk);
            }
            id_to_token.push(token.to_string());
            counts.push(count);
        }
        if id_to_token.is_empty() {
            return Err(VocabFormatError::MissingUnk);
        }
        Ok(Vocabulary::from_parts(id_to_token, counts))
    }

    /// Rebuilds a vocabulary from id-ordered token and count lists (as
    /// stored in checkpoints).
    pub fn from_id_order(
        tokens: Vec<String>,
        counts: Vec<u64>,
    ) -> Result<Vocabulary, VocabFormatError> {
        if tokens.first().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(VocabFormatError::MissingUnk);
        }
        if tokens.len() != counts.len() {
            return Err(VocabFormatError::LengthMismatch);
        }
        Ok(Vocabulary::from_parts(tokens, counts))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VocabFormatError {
    MissingTab { line: usize },
    BadCount { line: usize },
    MissingUnk,
    LengthMismatch,
}

impl core::fmt::Display for VocabFormatError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VocabFormatError::MissingTab { line } => {
                write!(f, "vocabulary line {line}: expected token<TAB>count")
            }
            VocabFormatError::BadCount { line } => {
                write!(f, "vocabulary line {line}: count is not an integer")
            }
            VocabFormatError::MissingUnk => {
                write!(f, "vocabulary must start with the {UNK_TOKEN} entry")
            }
            VocabFormatError::LengthMismatch => {
                write!(f, "token and count lists have different lengths")
            }
        }
    }
}

impl core::error::Error for VocabFormatError {}
