//! Builds the three coherence training tasks from paragraphs: adjacent
//! sentence pairs with random order swaps, next-sentence selection from
//! five candidates, and conjunction-category recovery driven by a fixed
//! 40-phrase lexicon.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::text::{Paragraph, Sentence};

/// The nine conjunction categories. Variant order defines the class
/// index used by the conjunction head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Addition,
    Contrast,
    Time,
    Result,
    Specific,
    Compare,
    Strengthen,
    Return,
    Recognize,
}

pub const CATEGORY_COUNT: usize = 9;

pub const ALL_CATEGORIES: [Category; CATEGORY_COUNT] = [
    Category::Addition,
    Category::Contrast,
    Category::Time,
    Category::Result,
    Category::Specific,
    Category::Compare,
    Category::Strengthen,
    Category::Return,
    Category::Recognize,
];

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Addition => "addition",
            Category::Contrast => "contrast",
            Category::Time => "time",
            Category::Result => "result",
            Category::Specific => "specific",
            Category::Compare => "compare",
            Category::Strengthen => "strengthen",
            Category::Return => "return",
            Category::Recognize => "recognize",
        }
    }

    /// Dense class index (position in `ALL_CATEGORIES`).
    pub fn index(self) -> usize {
        self as usize
    }
}

const LEXICON: [(&str, Category); 40] = [
    ("again", Category::Addition),
    ("also", Category::Addition),
    ("besides", Category::Addition),
    ("finally", Category::Addition),
    ("further", Category::Addition),
    ("furthermore", Category::Addition),
    ("moreover", Category::Addition),
    ("in addition", Category::Addition),
    ("anyway", Category::Contrast),
    ("contrarily", Category::Contrast),
    ("however", Category::Contrast),
    ("conversely", Category::Contrast),
    ("instead", Category::Contrast),
    ("nonetheless", Category::Contrast),
    ("nevertheless", Category::Contrast),
    ("in contrast", Category::Contrast),
    ("otherwise", Category::Contrast),
    ("rather", Category::Contrast),
    ("meanwhile", Category::Time),
    ("next", Category::Time),
    ("then", Category::Time),
    ("now", Category::Time),
    ("thereafter", Category::Time),
    ("accordingly", Category::Result),
    ("consequently", Category::Result),
    ("hence", Category::Result),
    ("thus", Category::Result),
    ("therefore", Category::Result),
    ("namely", Category::Specific),
    ("specifically", Category::Specific),
    ("notably", Category::Specific),
    ("that is", Category::Specific),
    ("for example", Category::Specific),
    ("likewise", Category::Compare),
    ("similarly", Category::Compare),
    ("indeed", Category::Strengthen),
    ("in fact", Category::Strengthen),
    ("still", Category::Return),
    ("undoubtedly", Category::Recognize),
    ("certainly", Category::Recognize),
];

/// The fixed phrase-to-category mapping. Phrases are one or two
/// lowercase tokens; matching is longest-first against sentence-initial
/// tokens.
#[derive(Clone, Debug)]
pub struct ConjunctionLexicon {
    /// (phrase tokens, category), two-token phrases first.
    entries: Vec<(Vec<String>, Category)>,
}

/// Returns the built-in 40-phrase, 9-category lexicon.
pub fn builtin_conjunction_lexicon() -> ConjunctionLexicon {
    let mut entries: Vec<(Vec<String>, Category)> = LEXICON
        .iter()
        .map(|(phrase, category)| {
            let tokens: Vec<String> = phrase.split(' ').map(str::to_string).collect();
            (tokens, *category)
        })
        .collect();
    // Longest phrases first so two-token matches win over one-token.
    entries.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    ConjunctionLexicon { entries }
}

impl ConjunctionLexicon {
    pub fn phrase_count(&self) -> usize {
        self.entries.len()
    }

    pub fn categories(&self) -> Vec<Category> {
        let mut cats: Vec<Category> = self.entries.iter().map(|(_, c)| *c).collect();
        cats.sort_unstable();
        cats.dedup();
        cats
    }

    pub fn category_of(&self, phrase: &str) -> Option<Category> {
        let tokens: Vec<&str> = phrase.split(' ').collect();
        self.entries
            .iter()
            .find(|(p, _)| p.len() == tokens.len() && p.iter().zip(&tokens).all(|(a, b)| a == b))
            .map(|(_, c)| *c)
    }

    pub fn phrases(&self) -> impl Iterator<Item = (String, Category)> + '_ {
        self.entries.iter().map(|(p, c)| (p.join(" "), *c))
    }
}

/// A successful sentence-initial conjunction match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjunctionMatch {
    pub category: Category,
    pub stripped: Sentence,
    pub phrase: String,
}

/// Matches the longest lexicon phrase against the sentence's initial
/// tokens (two-token phrases before one-token). The phrase and one
/// immediately following `,` token are removed. Returns `None` on no
/// match or when stripping would empty the sentence.
pub fn match_conjunction(lex: &ConjunctionLexicon, s: &Sentence) -> Option<ConjunctionMatch> {
    let tokens = s.tokens();
    for (phrase, category) in &lex.entries {
        if tokens.len() < phrase.len() {
            continue;
        }
        if phrase.iter().zip(tokens).all(|(a, b)| a == b) {
            let mut rest = phrase.len();
            if tokens.get(rest).map(String::as_str) == Some(",") {
                rest += 1;
            }
            if rest >= tokens.len() {
                return None;
            }
            return Some(ConjunctionMatch {
                category: *category,
                stripped: Sentence(tokens[rest..].to_vec()),
                phrase: phrase.join(" "),
            });
        }
    }
    None
}

/// An adjacent sentence pair, possibly order-swapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderExample {
    pub s0: Sentence,
    pub s1: Sentence,
    pub swapped: bool,
}

/// An adjacent pair whose second sentence opened with a lexicon phrase;
/// the phrase has been stripped and its category is the label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjunctionExample {
    pub s0: Sentence,
    pub s1: Sentence,
    pub category: Category,
    pub phrase: String,
}

/// Paragraph-initial context plus five candidate successors; `answer`
/// indexes the true fourth sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextExample {
    pub context: Vec<Sentence>,
    pub candidates: Vec<Sentence>,
    pub answer: u8,
}

impl NextExample {
    pub fn is_well_formed(&self) -> bool {
        self.context.len() == 3 && self.candidates.len() == 5 && self.answer < 5
    }
}

/// A single JSONL record from any of the three tasks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum Record {
    Order(OrderExample),
    Conjunction(ConjunctionExample),
    Next(NextExample),
}

/// One example per adjacent pair, in source order. Each pair draws one
/// uniform bit: 1 stores the pair reversed with `swapped = true`.
pub fn extract_order_pairs(p: &Paragraph, rng: &mut Rng) -> Vec<OrderExample> {
    let mut examples = Vec::new();
    for window in p.sentences.windows(2) {
        let swap = rng.next_bit();
        let (s0, s1) = if swap {
            (window[1].clone(), window[0].clone())
        } else {
            (window[0].clone(), window[1].clone())
        };
        examples.push(OrderExample {
            s0,
            s1,
            swapped: swap,
        });
    }
    examples
}

/// True when the sentence's initial tokens spell a lexicon phrase.
pub fn begins_with_phrase(lex: &ConjunctionLexicon, s: &Sentence) -> bool {
    let tokens = s.tokens();
    lex.entries
        .iter()
        .any(|(p, _)| tokens.len() >= p.len() && p.iter().zip(tokens).all(|(a, b)| a == b))
}

/// One example per adjacent pair whose second sentence starts with a
/// lexicon phrase. Pairs whose stripped remainder still opens with a
/// phrase are ambiguous and skipped.
pub fn extract_conjunction_pairs(
    lex: &ConjunctionLexicon,
    p: &Paragraph,
) -> Vec<ConjunctionExample> {
    let mut examples = Vec::new();
    for window in p.sentences.windows(2) {
        if let Some(m) = match_conjunction(lex, &window[1]) {
            if begins_with_phrase(lex, &m.stripped) {
                continue;
            }
            examples.push(ConjunctionExample {
                s0: window[0].clone(),
                s1: m.stripped,
                category: m.category,
                phrase: m.phrase,
            });
        }
    }
    examples
}

/// Minimum paragraph length for a NEXT example: three context
/// sentences, the true successor, and four later distractors.
pub const NEXT_MIN_SENTENCES: usize = 8;

/// Builds a NEXT example from a paragraph with at least eight
/// sentences: context = sentences 1-3, truth = sentence 4, distractors
/// drawn uniformly without replacement from the remainder, candidate
/// order shuffled.
pub fn extract_next_example(p: &Paragraph, rng: &mut Rng) -> Option<NextExample> {
    if p.sentences.len() < NEXT_MIN_SENTENCES {
        return None;
    }
    let context = p.sentences[..3].to_vec();
    let truth_pos = 3usize;
    let pool: Vec<usize> = (4..p.sentences.len()).collect();
    let distractors = rng.sample_without_replacement(&pool, 4);

    let mut positions = Vec::with_capacity(5);
    positions.push(truth_pos);
    positions.extend(distractors);
    rng.shuffle(&mut positions);

    let answer = positions.iter().position(|&pos| pos == truth_pos).unwrap() as u8;
    let candidates = positions
        .iter()
        .map(|&pos| p.sentences[pos].clone())
        .collect();
    Some(NextExample {
        context,
        candidates,
        answer,
    })
}
