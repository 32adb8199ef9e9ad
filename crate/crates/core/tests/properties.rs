//! Property tests for the extraction pipeline's structural invariants.

use proptest::prelude::*;

use discsent_core::discourse::{
    builtin_conjunction_lexicon, extract_next_example, extract_order_pairs, match_conjunction,
    Record,
};
use discsent_core::rng::Rng;
use discsent_core::text::{split_paragraphs, tokenize, Paragraph, RawDocument, Sentence};
use discsent_core::vocab::Vocabulary;

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,8}(['-][a-z]{1,4})?"
}

fn raw_sentence() -> impl Strategy<Value = String> {
    (
        proptest::collection::vec(word(), 1..8),
        prop_oneof![Just("."), Just("!"), Just("?")],
    )
        .prop_map(|(words, terminator)| format!("{}{}", words.join(" "), terminator))
}

fn tokenized_sentence() -> impl Strategy<Value = Sentence> {
    raw_sentence().prop_map(|s| tokenize(&s).unwrap())
}

fn paragraph(min_sentences: usize, max_sentences: usize) -> impl Strategy<Value = Paragraph> {
    proptest::collection::vec(tokenized_sentence(), min_sentences..=max_sentences).prop_map(
        |sentences| Paragraph {
            doc_id: "prop".to_string(),
            index: 0,
            sentences,
        },
    )
}

proptest! {
    #[test]
    fn paragraph_split_inverts_blank_line_join(
        segments in proptest::collection::vec("[a-z][a-z .,]{0,30}[a-z.]", 1..8)
    ) {
        let text = segments.join("\n\n");
        let doc = RawDocument::new("prop", text);
        prop_assert_eq!(split_paragraphs(&doc), segments);
    }

    #[test]
    fn tokenization_is_idempotent_on_its_output(raw in raw_sentence()) {
        let first = tokenize(&raw).unwrap();
        let again = tokenize(&first.text()).unwrap();
        prop_assert_eq!(first, again);
    }

    #[test]
    fn tokenization_of_punctuated_text_is_idempotent(
        raw in r#"[a-z"(\[\]).!?,;: ]{1,40}"#
    ) {
        if let Ok(first) = tokenize(&raw) {
            let again = tokenize(&first.text()).unwrap();
            prop_assert_eq!(first, again);
        }
    }

    #[test]
    fn encoding_preserves_length_and_decodes_to_unk_holes(
        corpus in proptest::collection::vec(tokenized_sentence(), 1..12),
        probe in tokenized_sentence()
    ) {
        let vocab = Vocabulary::build(&corpus, 1);
        let ids = vocab.encode(&probe);
        prop_assert_eq!(ids.len(), probe.len());
        let decoded = vocab.decode(&ids);
        for (orig, dec) in probe.tokens().iter().zip(decoded.tokens()) {
            if vocab.id_of(orig) == 0 {
                prop_assert_eq!(dec, "<unk>");
            } else {
                prop_assert_eq!(dec, orig);
            }
        }
    }

    #[test]
    fn vocabulary_ignores_presentation_order(
        corpus in proptest::collection::vec(tokenized_sentence(), 1..12),
        seed in any::<u64>()
    ) {
        let forward = Vocabulary::build(&corpus, 1);
        let mut shuffled = corpus.clone();
        Rng::new(seed).shuffle(&mut shuffled);
        let reordered = Vocabulary::build(&shuffled, 1);
        prop_assert_eq!(forward, reordered);
    }

    #[test]
    fn order_extraction_counts_and_unswapping(p in paragraph(2, 10), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let examples = extract_order_pairs(&p, &mut rng);
        prop_assert_eq!(examples.len(), p.sentences.len() - 1);
        for (i, ex) in examples.iter().enumerate() {
            let (first, second) = if ex.swapped { (&ex.s1, &ex.s0) } else { (&ex.s0, &ex.s1) };
            prop_assert_eq!(first, &p.sentences[i]);
            prop_assert_eq!(second, &p.sentences[i + 1]);
        }
    }

    #[test]
    fn next_examples_are_well_formed(p in paragraph(1, 16), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        match extract_next_example(&p, &mut rng) {
            None => prop_assert!(p.sentences.len() < 8),
            Some(ex) => {
                prop_assert!(p.sentences.len() >= 8);
                prop_assert_eq!(ex.context.len(), 3);
                prop_assert_eq!(ex.candidates.len(), 5);
                prop_assert!(ex.answer < 5);
                prop_assert_eq!(&ex.context[..], &p.sentences[..3]);
                prop_assert_eq!(&ex.candidates[ex.answer as usize], &p.sentences[3]);
            }
        }
    }

    #[test]
    fn conjunction_reattachment_round_trips(
        s1 in tokenized_sentence(),
        phrase_idx in 0usize..40,
        with_comma in any::<bool>()
    ) {
        let lex = builtin_conjunction_lexicon();
        let (phrase, category) = lex.phrases().nth(phrase_idx).unwrap();
        let mut tokens: Vec<String> = phrase.split(' ').map(str::to_string).collect();
        if with_comma {
            tokens.push(",".to_string());
        }
        tokens.extend(s1.tokens().iter().cloned());
        let rebuilt = Sentence(tokens);
        if let Some(m) = match_conjunction(&lex, &rebuilt) {
            prop_assert_eq!(m.category, category);
            prop_assert_eq!(m.phrase, phrase);
            prop_assert_eq!(m.stripped, s1);
        } else {
            // Only possible when stripping would empty the sentence,
            // which cannot happen here since s1 is nonempty.
            prop_assert!(false, "re-attached sentence failed to match");
        }
    }

    #[test]
    fn records_round_trip_through_jsonl(p in paragraph(8, 12), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let lex = builtin_conjunction_lexicon();
        let mut records: Vec<Record> = Vec::new();
        records.extend(extract_order_pairs(&p, &mut rng).into_iter().map(Record::Order));
        records.extend(
            discsent_core::discourse::extract_conjunction_pairs(&lex, &p)
                .into_iter()
                .map(Record::Conjunction),
        );
        if let Some(next) = extract_next_example(&p, &mut rng) {
            records.push(Record::Next(next));
        }
        for record in records {
            let line = serde_json::to_string(&record).unwrap();
            let parsed: Record = serde_json::from_str(&line).unwrap();
            prop_assert_eq!(parsed, record);
        }
    }
}

#[test]
fn match_conjunction_strips_at_most_one_comma() {
    let lex = builtin_conjunction_lexicon();
    let s = Sentence::from_tokens(["still", ",", ",", "quiet", "."]);
    let m = match_conjunction(&lex, &s).unwrap();
    assert_eq!(m.stripped, Sentence::from_tokens([",", "quiet", "."]));
}
