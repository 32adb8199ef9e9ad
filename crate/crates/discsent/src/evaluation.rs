//! Drivers for `eval`, `encode`, `nn`, and `probe`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use discsent_core::checkpoint::decode_checkpoint;
use discsent_core::model::Model;
use discsent_core::probe::{linear_probe, pair_features, ProbeConfig, ProbeReport};
use discsent_core::retrieval::{encode_corpus, nearest_neighbors, SentenceIndex};
use discsent_core::schedule::TaskKind;
use discsent_core::text;
use discsent_core::train::{evaluate_intrinsic, IntrinsicReport};

use crate::error::{CliError, Result};
use crate::indexfile::{read_index, write_index, INDEX_EXT};
use crate::training::load_task_data;

pub fn load_model(path: &Path) -> Result<Model<f32>> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
    decode_checkpoint(&bytes).map_err(|e| CliError::data(format!("'{}'", path.display()), e))
}

/// Intrinsic accuracy on the held-out files in a dataset directory,
/// using the checkpoint's own vocabulary.
pub fn run_eval(
    model_path: &Path,
    data_dir: &Path,
    tasks: &[TaskKind],
) -> Result<IntrinsicReport> {
    let model = load_model(model_path)?;
    let heldout = load_task_data(data_dir, &model.vocab, tasks, true)?;
    evaluate_intrinsic(&model, &heldout, tasks).map_err(|e| CliError::Data(e.to_string()))
}

fn read_sentence_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct EncodeSummary {
    pub sentences: usize,
    pub skipped: usize,
    pub dim: usize,
    pub index: PathBuf,
    pub sidecar: PathBuf,
}

/// Encodes one sentence per input line and persists the index.
pub fn run_encode(model_path: &Path, input: &Path, out_prefix: &Path) -> Result<EncodeSummary> {
    let model = load_model(model_path)?;
    let lines = read_sentence_lines(input)?;
    if lines.is_empty() {
        return Err(CliError::Data(format!(
            "no sentences in '{}'",
            input.display()
        )));
    }
    let (index, skipped) =
        encode_corpus(&model, &lines).map_err(|e| CliError::Data(e.to_string()))?;
    if skipped > 0 {
        log::warn!("skipped {skipped} lines that tokenize to nothing");
    }
    let (index_path, sidecar_path) = write_index(&index, out_prefix)?;
    Ok(EncodeSummary {
        sentences: index.len(),
        skipped,
        dim: index.dim(),
        index: index_path,
        sidecar: sidecar_path,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NnHit {
    pub distance: f64,
    pub sentence: String,
}

/// Nearest neighbors of a query sentence. The index argument is either
/// a persisted `.idx` file or a plain-text file of sentences encoded on
/// the fly.
pub fn run_nn(model_path: &Path, index_path: &Path, query: &str, k: usize) -> Result<Vec<NnHit>> {
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let model = load_model(model_path)?;
    let index: SentenceIndex<f32> = if index_path
        .extension()
        .is_some_and(|e| e == INDEX_EXT)
    {
        read_index(index_path)?
    } else {
        let lines = read_sentence_lines(index_path)?;
        if lines.is_empty() {
            return Err(CliError::Data(format!(
                "no sentences in '{}'",
                index_path.display()
            )));
        }
        let (index, skipped) =
            encode_corpus(&model, &lines).map_err(|e| CliError::Data(e.to_string()))?;
        if skipped > 0 {
            log::warn!("skipped {skipped} lines that tokenize to nothing");
        }
        index
    };
    if index.dim() != model.output_dim() {
        return Err(CliError::Data(format!(
            "index dimension {} does not match model dimension {}",
            index.dim(),
            model.output_dim()
        )));
    }

    let sentence = text::tokenize(&query.to_lowercase())
        .map_err(|_| CliError::Data("query tokenizes to nothing".into()))?;
    let ids = model.vocab.encode(&sentence);
    let encoding = model
        .encode_ids(&ids)
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(nearest_neighbors(&index, &encoding, k)
        .into_iter()
        .map(|(i, distance)| NnHit {
            distance,
            sentence: index.sentence(i).to_string(),
        })
        .collect())
}

/// One row of a labeled TSV file: label, sentence, optional second
/// sentence (pair tasks).
struct LabeledRow {
    label: usize,
    first: String,
    second: Option<String>,
}

fn parse_labeled_tsv(path: &Path) -> Result<Vec<LabeledRow>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
    let mut rows = Vec::new();
    let mut arity: Option<usize> = None;
    for (idx, line) in content.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(CliError::Data(format!(
                "{}:{lineno}: expected label<TAB>sentence[<TAB>sentence]",
                path.display()
            )));
        }
        match arity {
            None => arity = Some(fields.len()),
            Some(a) if a != fields.len() => {
                return Err(CliError::Data(format!(
                    "{}:{lineno}: mixed single and pair rows",
                    path.display()
                )));
            }
            _ => {}
        }
        let label: usize = fields[0].parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{lineno}: label '{}' is not a nonnegative integer",
                path.display(),
                fields[0]
            ))
        })?;
        rows.push(LabeledRow {
            label,
            first: fields[1].to_string(),
            second: fields.get(2).map(|s| s.to_string()),
        });
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!(
            "no labeled rows in '{}'",
            path.display()
        )));
    }
    Ok(rows)
}

fn featurize(model: &Model<f32>, rows: &[LabeledRow], path: &Path) -> Result<Vec<(Vec<f32>, usize)>> {
    let encode_one = |sentence: &str, lineno: usize| -> Result<Vec<f32>> {
        let tokens = text::tokenize(&sentence.to_lowercase()).map_err(|_| {
            CliError::Data(format!(
                "{}:{lineno}: sentence tokenizes to nothing",
                path.display()
            ))
        })?;
        model
            .encode_ids(&model.vocab.encode(&tokens))
            .map_err(|e| CliError::Data(e.to_string()))
    };
    rows.iter()
        .enumerate()
        .map(|(idx, row)| {
            let lineno = idx + 1;
            let a = encode_one(&row.first, lineno)?;
            let features = match &row.second {
                Some(second) => pair_features(&a, &encode_one(second, lineno)?),
                None => a,
            };
            Ok((features, row.label))
        })
        .collect()
}

/// Trains the frozen-encoder linear probe on labeled TSV data.
pub fn run_probe(
    model_path: &Path,
    train_path: &Path,
    test_path: &Path,
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let model = load_model(model_path)?;
    let train_rows = parse_labeled_tsv(train_path)?;
    let test_rows = parse_labeled_tsv(test_path)?;
    if (train_rows[0].second.is_some()) != (test_rows[0].second.is_some()) {
        return Err(CliError::Data(
            "train and test files disagree on single vs pair rows".into(),
        ));
    }
    let train = featurize(&model, &train_rows, train_path)?;
    let test = featurize(&model, &test_rows, test_path)?;
    linear_probe(&train, &test, config).map_err(|e| CliError::Data(e.to_string()))
}
