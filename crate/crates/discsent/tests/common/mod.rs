//! Deterministic narrative-corpus generator for integration tests.
//!
//! Paragraphs follow a time-of-day progression, every sentence opens
//! with a stage marker, and a third of the sentences are continuation
//! sentences that open with a conjunction phrase whose category is
//! reflected in the sentence body. That gives all three tasks a
//! genuine, learnable signal at desk scale.

use std::collections::BTreeMap;
use std::path::Path;

use discsent_core::discourse::{builtin_conjunction_lexicon, Category};
use discsent_core::rng::{derive_seed, Rng};

const ENTITIES: [&str; 10] = [
    "Mara",
    "Old Tom",
    "The miller",
    "Sergeant Pike",
    "Widow Hale",
    "The twins",
    "Doctor Finch",
    "The ferryman",
    "Young Bess",
    "The magistrate",
];

/// Stage markers in narrative order; none begins with a lexicon phrase.
const MARKERS: [&str; 12] = [
    "At dawn",
    "Early on",
    "Soon enough",
    "Before long",
    "By midday",
    "Presently",
    "Later that day",
    "Toward dusk",
    "After sunset",
    "By nightfall",
    "Late at night",
    "Near midnight",
];

const ACTIONS: [&str; 20] = [
    "carried the water jars up the hill",
    "mended the torn net by the door",
    "counted the sacks in the cellar",
    "watched the road from the window",
    "led the horses across the ford",
    "stacked firewood against the wall",
    "read the letter a second time",
    "swept the ashes from the hearth",
    "paced the length of the bridge",
    "sharpened the scythe on the step",
    "traded salt for a bolt of cloth",
    "followed the cart tracks north",
    "bolted the gate against the wind",
    "drew a bucket from the well",
    "tallied the day's takings twice",
    "walked the fence line to the oak",
    "patched the roof above the stall",
    "listened for hooves on the lane",
    "hung the lantern over the door",
    "turned the key in the heavy lock",
];

/// Conjunction-continuation bodies keyed by category. Each body's
/// vocabulary signals its category, and none begins with a lexicon
/// phrase.
fn category_bodies(category: Category) -> &'static [&'static str] {
    match category {
        Category::Addition => &[
            "she packed more rope for the climb",
            "he brought another lantern inside",
            "they added fresh straw to the cart",
            "a second helping went onto every plate",
        ],
        Category::Contrast => &[
            "the plan came to nothing",
            "the door refused to open",
            "no answer ever arrived",
            "the money was nowhere to be found",
        ],
        Category::Time => &[
            "the waiting stretched on for hours",
            "the clock crawled toward the hour",
            "the watch changed at the gate",
            "the bells counted out the quarter",
        ],
        Category::Result => &[
            "the beam finally gave way",
            "the whole scheme collapsed at once",
            "the debt was settled for good",
            "the quarrel ended then and there",
        ],
        Category::Specific => &[
            "the list named every missing tool",
            "one detail stood out from the rest",
            "the map marked the exact spot",
            "the ledger gave the precise sum",
        ],
        Category::Compare => &[
            "the second attempt matched the first",
            "her answer echoed his own words",
            "the new lock looked just like the old one",
            "both carts carried the same load",
        ],
        Category::Strengthen => &[
            "it was far worse than anyone feared",
            "the proof was plainer than daylight",
            "the harvest beat every record in memory",
            "the current ran stronger than the oars",
        ],
        Category::Return => &[
            "the old doubt crept back in",
            "the same argument started over",
            "she found herself at the gate once more",
            "the letter came back unopened",
        ],
        Category::Recognize => &[
            "everyone agreed it had to be done",
            "nobody could deny the marks on the floor",
            "the whole village knew it by heart",
            "the truth of it was plain to all",
        ],
    }
}

fn phrases_by_category() -> BTreeMap<Category, Vec<String>> {
    let lexicon = builtin_conjunction_lexicon();
    let mut map: BTreeMap<Category, Vec<String>> = BTreeMap::new();
    for (phrase, category) in lexicon.phrases() {
        map.entry(category).or_default().push(phrase);
    }
    map
}

fn capitalize(phrase: &str) -> String {
    let mut chars = phrase.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

pub fn generate_paragraph(rng: &mut Rng, phrases: &BTreeMap<Category, Vec<String>>) -> String {
    let entity = ENTITIES[rng.next_below(ENTITIES.len() as u64) as usize];
    let base_sentences = 9 + rng.next_below(3) as usize;
    let start_stage = rng.next_below(2) as usize;
    let mut sentences: Vec<String> = Vec::new();
    for i in 0..base_sentences {
        let marker = MARKERS[(start_stage + i).min(MARKERS.len() - 1)];
        let action = ACTIONS[rng.next_below(ACTIONS.len() as u64) as usize];
        sentences.push(format!("{marker}, {entity} {action}."));
        // A third of base sentences get a conjunction continuation.
        if rng.next_below(3) == 0 {
            let categories: Vec<&Category> = phrases.keys().collect();
            let category = *categories[rng.next_below(categories.len() as u64) as usize];
            let options = &phrases[&category];
            let phrase = &options[rng.next_below(options.len() as u64) as usize];
            let bodies = category_bodies(category);
            let body = bodies[rng.next_below(bodies.len() as u64) as usize];
            sentences.push(format!("{}, {body}.", capitalize(phrase)));
        }
    }
    sentences.join(" ")
}

/// Writes a corpus of `paragraphs` narrative paragraphs across several
/// files under `dir`. Deterministic in `seed`.
pub fn generate_corpus(dir: &Path, paragraphs: usize, seed: u64) {
    let phrases = phrases_by_category();
    let files = 8usize.min(paragraphs.max(1));
    let per_file = paragraphs.div_ceil(files);
    let mut remaining = paragraphs;
    for file_idx in 0..files {
        let mut rng = Rng::new(derive_seed(seed, &[b"corpus", &(file_idx as u64).to_le_bytes()]));
        let count = per_file.min(remaining);
        remaining -= count;
        let text: Vec<String> = (0..count)
            .map(|_| generate_paragraph(&mut rng, &phrases))
            .collect();
        std::fs::write(
            dir.join(format!("tale_{file_idx:02}.txt")),
            text.join("\n\n") + "\n",
        )
        .unwrap();
    }
}
