//! The `train` driver: loads vocabulary and datasets from a
//! `build-data` output directory, runs the joint training loop, logs
//! metrics as JSON Lines, and writes checkpoints.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use discsent_core::checkpoint::encode_checkpoint;
use discsent_core::discourse::Record;
use discsent_core::embed::parse_embeddings_text;
use discsent_core::model::{EncodedConjunction, EncodedNext, EncodedOrder, Model};
use discsent_core::schedule::TaskKind;
use discsent_core::train::{
    evaluate_intrinsic, IntrinsicReport, TaskData, TrainConfig, Trainer,
};
use discsent_core::vocab::Vocabulary;

use crate::error::{CliError, Result};
use crate::extract::dataset_path;
use crate::records::read_records;

#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub data_dir: PathBuf,
    pub out_path: PathBuf,
    pub metrics_path: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub config: TrainConfig,
    /// Held-out evaluation cadence in steps; 0 evaluates only at the end.
    pub eval_every: u64,
    /// Intermediate checkpoint cadence in steps; 0 saves only at the end.
    pub checkpoint_every: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainOutcome {
    pub steps: u64,
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heldout: Option<IntrinsicReport>,
}

#[derive(Serialize)]
struct MetricsRecord {
    step: u64,
    task: &'static str,
    loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    heldout: Option<IntrinsicReport>,
}

pub fn load_vocab(data_dir: &Path) -> Result<Vocabulary> {
    let path = data_dir.join("vocab.tsv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
    Vocabulary::from_tsv(&text).map_err(|e| CliError::data(format!("'{}'", path.display()), e))
}

fn encode_records(
    records: Vec<Record>,
    task: TaskKind,
    vocab: &Vocabulary,
    path: &Path,
    data: &mut TaskData,
) -> Result<()> {
    for (idx, record) in records.into_iter().enumerate() {
        let lineno = idx + 1;
        match (task, record) {
            (TaskKind::Order, Record::Order(ex)) => {
                data.order.push(EncodedOrder::from_example(&ex, vocab));
            }
            (TaskKind::Conjunction, Record::Conjunction(ex)) => {
                data.conjunction
                    .push(EncodedConjunction::from_example(&ex, vocab));
            }
            (TaskKind::Next, Record::Next(ex)) => {
                let encoded = EncodedNext::from_example(&ex, vocab).ok_or_else(|| {
                    CliError::Data(format!(
                        "{}:{lineno}: malformed next example",
                        path.display()
                    ))
                })?;
                data.next.push(encoded);
            }
            (want, _) => {
                return Err(CliError::Data(format!(
                    "{}:{lineno}: record does not belong to task '{}'",
                    path.display(),
                    want.as_str()
                )));
            }
        }
    }
    Ok(())
}

/// Loads the datasets for `tasks` from a `build-data` output
/// directory. With `heldout` the `.heldout.jsonl` files are read and
/// missing files are treated as empty; training files must exist.
pub fn load_task_data(
    data_dir: &Path,
    vocab: &Vocabulary,
    tasks: &[TaskKind],
    heldout: bool,
) -> Result<TaskData> {
    let mut data = TaskData::default();
    for &task in tasks {
        let path = dataset_path(data_dir, task, heldout);
        if !path.exists() {
            if heldout {
                continue;
            }
            return Err(CliError::Data(format!(
                "dataset file '{}' not found (run build-data first, or disable the task)",
                path.display()
            )));
        }
        let records = read_records(&path)?;
        encode_records(records, task, vocab, &path, &mut data)?;
    }
    Ok(data)
}

fn save_checkpoint(model: &Model<f32>, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(model))
        .map_err(|e| CliError::data(format!("writing '{}'", path.display()), e))
}

pub fn run_training(opts: &TrainOptions) -> Result<TrainOutcome> {
    let mut config = opts.config.clone();
    let vocab = load_vocab(&opts.data_dir)?;
    let data = load_task_data(&opts.data_dir, &vocab, &config.tasks, false)?;
    let heldout = load_task_data(&opts.data_dir, &vocab, &config.tasks, true)?;
    let heldout_tasks: Vec<TaskKind> = config
        .tasks
        .iter()
        .copied()
        .filter(|&t| heldout.len_for(t) > 0)
        .collect();

    let pretrained = match &opts.embeddings {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
            let table = parse_embeddings_text::<f32>(&text, &vocab)
                .map_err(|e| CliError::data(format!("'{}'", path.display()), e))?;
            if table.dim() != config.encoder.d_emb {
                log::info!(
                    "embedding file is {}-dimensional; overriding d_emb={}",
                    table.dim(),
                    config.encoder.d_emb
                );
                config.encoder.d_emb = table.dim();
            }
            Some(table)
        }
        None => None,
    };

    let model = Model::new(config.encoder, vocab, pretrained, config.seed)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut trainer = Trainer::new(model, config.clone(), data)?;

    let metrics_path = opts
        .metrics_path
        .clone()
        .unwrap_or_else(|| default_metrics_path(&opts.out_path));
    let metrics_file = File::create(&metrics_path)
        .map_err(|e| CliError::data(format!("creating '{}'", metrics_path.display()), e))?;
    let mut metrics = BufWriter::new(metrics_file);

    let mut final_report: Option<IntrinsicReport> = None;
    for step in 1..=config.steps {
        let info = trainer.train_step()?;
        let eval_now = (opts.eval_every > 0 && step % opts.eval_every == 0) || step == config.steps;
        let heldout_report = if eval_now && !heldout_tasks.is_empty() {
            let report = evaluate_intrinsic(&trainer.model, &heldout, &heldout_tasks)
                .map_err(|e| CliError::Data(e.to_string()))?;
            final_report = Some(report);
            Some(report)
        } else {
            None
        };
        let record = MetricsRecord {
            step: info.step,
            task: info.task.as_str(),
            loss: info.loss,
            heldout: heldout_report,
        };
        serde_json::to_writer(&mut metrics, &record)
            .and_then(|_| {
                use std::io::Write as _;
                metrics.write_all(b"\n").map_err(serde_json::Error::io)
            })
            .map_err(|e| CliError::data(format!("writing '{}'", metrics_path.display()), e))?;
        if opts.checkpoint_every > 0 && step % opts.checkpoint_every == 0 {
            save_checkpoint(&trainer.model, &opts.out_path)?;
            log::info!("checkpoint written at step {step}");
        }
        if step % 100 == 0 {
            log::info!(
                "step {step}/{}: task={} loss={:.4}",
                config.steps,
                info.task.as_str(),
                info.loss
            );
        }
    }
    metrics
        .flush()
        .map_err(|e| CliError::data(format!("flushing '{}'", metrics_path.display()), e))?;
    save_checkpoint(&trainer.model, &opts.out_path)?;

    Ok(TrainOutcome {
        steps: trainer.steps_taken(),
        checkpoint: opts.out_path.clone(),
        metrics: metrics_path,
        heldout: final_report,
    })
}

fn default_metrics_path(out_path: &Path) -> PathBuf {
    let mut name = out_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_string());
    name.push_str(".metrics.jsonl");
    out_path.with_file_name(name)
}
