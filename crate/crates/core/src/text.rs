//! Deterministic corpus ingestion: paragraph, sentence, and token
//! segmentation.
//!
//! The segmenter is rule-based on purpose — extraction must be
//! bit-reproducible across platforms, which rules out model-backed
//! tokenizers. Known limitation: abbreviations ("mr.") falsely end
//! sentences.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// A source document: an identifier (file path or URI) plus its text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDocument {
    pub source_id: String,
    pub text: String,
}

impl RawDocument {
    pub fn new(source_id: impl Into<String>, text: impl Into<String>) -> Self {
        let source_id = source_id.into();
        assert!(!source_id.is_empty(), "document source_id must be nonempty");
        RawDocument {
            source_id,
            text: text.into(),
        }
    }
}

/// A tokenized sentence: a nonempty list of nonempty, whitespace-free,
/// lowercase tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sentence(pub Vec<String>);

impl Sentence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tokens joined with single spaces.
    pub fn text(&self) -> String {
        self.0.join(" ")
    }

    pub fn from_tokens<I, T>(tokens: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Sentence(tokens.into_iter().map(Into::into).collect())
    }
}

/// An ordered run of sentences from one document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Paragraph {
    pub doc_id: String,
    pub index: usize,
    pub sentences: Vec<Sentence>,
}

/// Tokenization produced no tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmptySentence;

impl core::fmt::Display for EmptySentence {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "sentence has no tokens")
    }
}

impl core::error::Error for EmptySentence {}

/// Splits a document into raw paragraph strings on runs of blank lines
/// (a blank line is one whose characters are all whitespace). Empty
/// segments are dropped, order is preserved.
pub fn split_paragraphs(doc: &RawDocument) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in doc.text.lines() {
        if line.chars().all(char::is_whitespace) {
            if !current.is_empty() {
                paragraphs.push(current.join("\n"));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        paragraphs.push(current.join("\n"));
    }
    paragraphs
}

/// Characters that end a sentence.
fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Closing characters that stay attached to the left sentence when they
/// immediately follow a terminator.
fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']')
}

/// Lowercases the text, then splits after any of `. ! ?` that is
/// followed (after a run of closing quotes/brackets, which stay left)
/// by whitespace or end-of-text. Results are trimmed; empties dropped.
pub fn split_sentences(paragraph_text: &str) -> Vec<String> {
    let lower = paragraph_text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        current.push(c);
        i += 1;
        if is_terminator(c) {
            let mut j = i;
            while j < chars.len() && is_closer(chars[j]) {
                j += 1;
            }
            if j >= chars.len() || chars[j].is_whitespace() {
                current.extend(&chars[i..j]);
                i = j;
                flush_sentence(&mut sentences, &mut current);
            }
        }
    }
    flush_sentence(&mut sentences, &mut current);
    sentences
}

fn flush_sentence(sentences: &mut Vec<String>, current: &mut String) {
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    current.clear();
}

const ELLIPSIS: &str = "...";

/// Punctuation detached as its own token when it prefixes or suffixes a
/// word. Apostrophes and hyphens stay word-internal.
fn is_detachable(c: char) -> bool {
    matches!(
        c,
        ',' | '.' | '!' | '?' | ';' | ':' | '"' | '(' | ')' | '[' | ']'
    )
}

/// Splits an already-lowercase sentence into tokens: whitespace split,
/// then detachable punctuation peeled off word edges (repeatedly), with
/// `...` peeled as a single token.
pub fn tokenize(sentence: &str) -> Result<Sentence, EmptySentence> {
    let mut tokens: Vec<String> = Vec::new();
    for word in sentence.split_whitespace() {
        split_word(word, &mut tokens);
    }
    if tokens.is_empty() {
        return Err(EmptySentence);
    }
    Ok(Sentence(tokens))
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let mut rest = word;
    let mut suffixes: Vec<&str> = Vec::new();
    loop {
        if let Some(tail) = rest.strip_prefix(ELLIPSIS) {
            out.push(ELLIPSIS.to_string());
            rest = tail;
        } else if rest.starts_with(is_detachable) {
            out.push(rest[..1].to_string());
            rest = &rest[1..];
        } else {
            break;
        }
    }
    loop {
        if let Some(head) = rest.strip_suffix(ELLIPSIS) {
            suffixes.push(ELLIPSIS);
            rest = head;
        } else if rest.ends_with(is_detachable) {
            suffixes.push(&rest[rest.len() - 1..]);
            rest = &rest[..rest.len() - 1];
        } else {
            break;
        }
    }
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out.extend(suffixes.into_iter().rev().map(str::to_string));
}

/// Full per-paragraph pipeline: sentence split then tokenization.
/// Sentences that tokenize to nothing are dropped.
pub fn paragraph_sentences(paragraph_text: &str) -> Vec<Sentence> {
    split_sentences(paragraph_text)
        .iter()
        .filter_map(|s| tokenize(s).ok())
        .collect()
}

/// Segments a whole document into paragraphs of tokenized sentences.
/// Paragraphs with no surviving sentences are dropped; `index` counts
/// raw paragraphs, so it is stable under that dropping.
pub fn segment_document(doc: &RawDocument) -> Vec<Paragraph> {
    split_paragraphs(doc)
        .iter()
        .enumerate()
        .filter_map(|(index, text)| {
            let sentences = paragraph_sentences(text);
            if sentences.is_empty() {
                None
            } else {
                Some(Paragraph {
                    doc_id: doc.source_id.clone(),
                    index,
                    sentences,
                })
            }
        })
        .collect()
}
