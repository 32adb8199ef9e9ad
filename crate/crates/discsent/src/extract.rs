//! The `build-data` driver: walks a corpus, extracts the three task
//! datasets, splits off a held-out fraction, builds the vocabulary,
//! and writes everything under the output directory.
//!
//! Each paragraph draws from its own generator seeded by
//! hash(seed, doc_id, paragraph index), and held-out assignment hashes
//! record content, so output bytes are independent of worker count and
//! scheduling.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use discsent_core::discourse::{
    builtin_conjunction_lexicon, extract_conjunction_pairs, extract_next_example,
    extract_order_pairs, Record, NEXT_MIN_SENTENCES,
};
use discsent_core::rng::{derive_seed, fnv1a64, Rng};
use discsent_core::schedule::TaskKind;
use discsent_core::text::segment_document;
use discsent_core::vocab::TokenCounts;

use crate::corpus::{read_document, walk_corpus};
use crate::error::{CliError, Result};
use crate::records::{record_to_line, JsonlWriter};

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub corpus_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub heldout_fraction: f64,
    pub min_count: u64,
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub total: u64,
    pub train: u64,
    pub heldout: u64,
}

impl SplitCounts {
    fn add(&mut self, heldout: bool) {
        self.total += 1;
        if heldout {
            self.heldout += 1;
        } else {
            self.train += 1;
        }
    }
}

/// Contents of `stats.json`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub seed: u64,
    pub heldout_fraction: f64,
    pub min_count: u64,
    pub documents: u64,
    pub paragraphs: u64,
    /// Paragraphs with at least eight sentences (NEXT-eligible).
    pub next_eligible_paragraphs: u64,
    pub order: SplitCounts,
    pub conjunction: SplitCounts,
    pub next: SplitCounts,
    pub conjunction_categories: BTreeMap<String, u64>,
    pub vocabulary_size: u64,
}

struct DocExtract {
    paragraphs: u64,
    next_eligible: u64,
    records: Vec<ExtractedRecord>,
    counts: TokenCounts,
}

struct ExtractedRecord {
    task: TaskKind,
    line: String,
    heldout: bool,
    category: Option<&'static str>,
}

fn heldout_threshold(fraction: f64) -> u64 {
    (fraction.clamp(0.0, 1.0) * u64::MAX as f64) as u64
}

fn assign_heldout(line: &str, threshold: u64) -> bool {
    fnv1a64(line.as_bytes()) < threshold
}

fn extract_document(doc_id: &str, path: &Path, seed: u64, threshold: u64) -> Result<DocExtract> {
    let doc = read_document(doc_id, path)?;
    let lexicon = builtin_conjunction_lexicon();
    let mut out = DocExtract {
        paragraphs: 0,
        next_eligible: 0,
        records: Vec::new(),
        counts: TokenCounts::new(),
    };
    for paragraph in segment_document(&doc) {
        out.paragraphs += 1;
        if paragraph.sentences.len() >= NEXT_MIN_SENTENCES {
            out.next_eligible += 1;
        }
        for sentence in &paragraph.sentences {
            out.counts.count_sentence(sentence);
        }

        let idx_bytes = (paragraph.index as u64).to_le_bytes();
        let mut order_rng = Rng::new(derive_seed(
            seed,
            &[b"order", doc_id.as_bytes(), &idx_bytes],
        ));
        for ex in extract_order_pairs(&paragraph, &mut order_rng) {
            let line = record_to_line(&Record::Order(ex));
            let heldout = assign_heldout(&line, threshold);
            out.records.push(ExtractedRecord {
                task: TaskKind::Order,
                line,
                heldout,
                category: None,
            });
        }
        for ex in extract_conjunction_pairs(&lexicon, &paragraph) {
            let category = ex.category.as_str();
            let line = record_to_line(&Record::Conjunction(ex));
            let heldout = assign_heldout(&line, threshold);
            out.records.push(ExtractedRecord {
                task: TaskKind::Conjunction,
                line,
                heldout,
                category: Some(category),
            });
        }
        let mut next_rng = Rng::new(derive_seed(
            seed,
            &[b"next", doc_id.as_bytes(), &idx_bytes],
        ));
        if let Some(ex) = extract_next_example(&paragraph, &mut next_rng) {
            let line = record_to_line(&Record::Next(ex));
            let heldout = assign_heldout(&line, threshold);
            out.records.push(ExtractedRecord {
                task: TaskKind::Next,
                line,
                heldout,
                category: None,
            });
        }
    }
    Ok(out)
}

/// Runs the full extraction. Returns the stats that were also written
/// to `stats.json`.
pub fn build_datasets(opts: &BuildOptions) -> Result<DatasetStats> {
    if !(0.0..1.0).contains(&opts.heldout_fraction) {
        return Err(CliError::Usage(format!(
            "heldout fraction must be in [0, 1), got {}",
            opts.heldout_fraction
        )));
    }
    if opts.min_count < 1 {
        return Err(CliError::Usage("min-count must be at least 1".into()));
    }
    let docs = walk_corpus(&opts.corpus_dir)?;
    std::fs::create_dir_all(&opts.out_dir)
        .map_err(|e| CliError::data(format!("creating '{}'", opts.out_dir.display()), e))?;

    let threshold = heldout_threshold(opts.heldout_fraction);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::data("building worker pool", e))?;
    log::info!(
        "extracting from {} documents with {} workers",
        docs.len(),
        pool.current_num_threads()
    );
    let extracts: Vec<DocExtract> = pool.install(|| {
        docs.par_iter()
            .map(|(doc_id, path)| extract_document(doc_id, path, opts.seed, threshold))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut stats = DatasetStats {
        seed: opts.seed,
        heldout_fraction: opts.heldout_fraction,
        min_count: opts.min_count,
        documents: docs.len() as u64,
        ..DatasetStats::default()
    };

    let mut writers: BTreeMap<(TaskKind, bool), JsonlWriter> = BTreeMap::new();
    for task in [TaskKind::Order, TaskKind::Conjunction, TaskKind::Next] {
        for heldout in [false, true] {
            let path = dataset_path(&opts.out_dir, task, heldout);
            writers.insert((task, heldout), JsonlWriter::create(&path)?);
        }
    }

    let mut counts = TokenCounts::new();
    for extract in extracts {
        stats.paragraphs += extract.paragraphs;
        stats.next_eligible_paragraphs += extract.next_eligible;
        counts.merge(extract.counts);
        for record in extract.records {
            let split = match record.task {
                TaskKind::Order => &mut stats.order,
                TaskKind::Conjunction => &mut stats.conjunction,
                TaskKind::Next => &mut stats.next,
            };
            split.add(record.heldout);
            if let Some(category) = record.category {
                *stats
                    .conjunction_categories
                    .entry(category.to_string())
                    .or_insert(0) += 1;
            }
            writers
                .get_mut(&(record.task, record.heldout))
                .expect("writer exists for every task/split")
                .write_line(&record.line)?;
        }
    }
    for (_, writer) in writers {
        writer.finish()?;
    }

    let vocabulary = counts.into_vocabulary(opts.min_count);
    stats.vocabulary_size = vocabulary.len() as u64;
    let vocab_path = opts.out_dir.join("vocab.tsv");
    std::fs::write(&vocab_path, vocabulary.to_tsv())
        .map_err(|e| CliError::data(format!("writing '{}'", vocab_path.display()), e))?;

    let stats_path = opts.out_dir.join("stats.json");
    let stats_json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    std::fs::write(&stats_path, stats_json + "\n")
        .map_err(|e| CliError::data(format!("writing '{}'", stats_path.display()), e))?;

    Ok(stats)
}

pub fn dataset_path(dir: &Path, task: TaskKind, heldout: bool) -> PathBuf {
    let name = if heldout {
        format!("{}.heldout.jsonl", task.as_str())
    } else {
        format!("{}.jsonl", task.as_str())
    };
    dir.join(name)
}
