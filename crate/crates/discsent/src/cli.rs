//! Command-line interface: `discsent build-data | train | eval |
//! encode | nn | probe`.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use discsent_core::encoder::{EncoderConfig, EncoderKind};
use discsent_core::probe::ProbeConfig;
use discsent_core::schedule::{TaskKind, ALL_TASKS};
use discsent_core::train::TrainConfig;

use crate::error::{CliError, Result};
use crate::evaluation::{run_encode, run_eval, run_nn, run_probe};
use crate::extract::{build_datasets, BuildOptions};
use crate::training::{run_training, TrainOptions};

#[derive(Parser, Debug)]
#[command(
    name = "discsent",
    version,
    about = "Discourse-coherence sentence encoder toolkit",
    long_about = "Extracts sentence-order, conjunction, and next-sentence training data \
                  from plain text, trains sentence encoders against the three tasks, and \
                  evaluates the learned representations."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extract the three task datasets from a plain-text corpus
    #[command(name = "build-data")]
    BuildData(BuildDataArgs),
    /// Train a sentence encoder jointly on the extracted datasets
    Train(TrainArgs),
    /// Report held-out accuracy for each task
    Eval(EvalArgs),
    /// Encode a file of sentences into a persisted index
    Encode(EncodeArgs),
    /// Print the nearest neighbors of a query sentence
    Nn(NnArgs),
    /// Train a linear probe on labeled sentences over frozen encodings
    Probe(ProbeArgs),
}

#[derive(Args, Debug)]
pub struct BuildDataArgs {
    /// Directory of plain-text files (paragraphs separated by blank lines)
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory for the JSONL datasets, vocab.tsv, and stats.json
    #[arg(long)]
    pub out: PathBuf,
    /// Extraction seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Held-out fraction in [0, 1)
    #[arg(long, default_value_t = 0.02)]
    pub heldout: f64,
    /// Minimum token frequency for the vocabulary
    #[arg(long = "min-count", default_value_t = 2)]
    pub min_count: u64,
    /// Worker threads (default: machine parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset directory produced by build-data
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint output path
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Encoder kind: cbow, gru, or bigru
    #[arg(long, value_parser = EncoderKind::from_str)]
    pub encoder: Option<EncoderKind>,
    /// Number of training steps
    #[arg(long)]
    pub steps: Option<u64>,
    /// Training seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// AdaGrad learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Examples per batch
    #[arg(long = "batch-size")]
    pub batch_size: Option<usize>,
    /// Word embedding dimension (overridden by --embeddings file)
    #[arg(long = "d-emb")]
    pub d_emb: Option<usize>,
    /// Hidden width (CBOW projection / GRU state / per-direction BiGRU state)
    #[arg(long = "d-h")]
    pub d_h: Option<usize>,
    /// CONJUNCTION subsampling factor
    #[arg(long = "subsample-conj")]
    pub subsample_conj: Option<u32>,
    /// NEXT subsampling factor
    #[arg(long = "subsample-next")]
    pub subsample_next: Option<u32>,
    /// Comma-separated task list (default: order,conjunction,next)
    #[arg(long)]
    pub tasks: Option<String>,
    /// Pretrained word-vector text file (frozen embeddings)
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Metrics JSONL path (default: <out>.metrics.jsonl)
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Held-out evaluation cadence in steps (0 = only at the end)
    #[arg(long = "eval-every", default_value_t = 200)]
    pub eval_every: u64,
    /// Intermediate checkpoint cadence in steps (0 = only at the end)
    #[arg(long = "checkpoint-every", default_value_t = 0)]
    pub checkpoint_every: u64,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Checkpoint path
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset directory holding *.heldout.jsonl files
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated task list (default: order,conjunction,next)
    #[arg(long)]
    pub tasks: Option<String>,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Checkpoint path
    #[arg(long)]
    pub model: PathBuf,
    /// Text file with one sentence per line
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; writes <out>.idx and <out>.sents.txt
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct NnArgs {
    /// Checkpoint path
    #[arg(long)]
    pub model: PathBuf,
    /// Persisted .idx file, or a text file of sentences to encode
    #[arg(long)]
    pub index: PathBuf,
    /// Query sentence
    #[arg(long)]
    pub query: String,
    /// Number of neighbors to print
    #[arg(long, default_value_t = 5)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// Checkpoint path
    #[arg(long)]
    pub model: PathBuf,
    /// Training TSV: label<TAB>sentence[<TAB>sentence]
    #[arg(long)]
    pub train: PathBuf,
    /// Test TSV in the same format
    #[arg(long)]
    pub test: PathBuf,
    /// Probe training epochs
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Probe learning rate
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Probe batch size
    #[arg(long = "batch-size", default_value_t = 32)]
    pub batch_size: usize,
    /// Probe shuffling seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_tasks(spec: &Option<String>) -> Result<Vec<TaskKind>> {
    let Some(spec) = spec else {
        return Ok(ALL_TASKS.to_vec());
    };
    let mut tasks = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let task = TaskKind::from_str(part).map_err(CliError::Usage)?;
        if !tasks.contains(&task) {
            tasks.push(task);
        }
    }
    if tasks.is_empty() {
        return Err(CliError::Usage("no tasks selected".into()));
    }
    tasks.sort_unstable();
    Ok(tasks)
}

/// Builds the effective train config: defaults, then the config file,
/// then explicit flags.
pub fn resolve_train_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
            serde_json::from_str::<TrainConfig>(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut base = TrainConfig::default();
            if let Some(kind) = args.encoder {
                base.encoder = EncoderConfig::defaults(kind);
            }
            base
        }
    };
    if let Some(kind) = args.encoder {
        config.encoder.kind = kind;
    }
    if let Some(d_emb) = args.d_emb {
        config.encoder.d_emb = d_emb;
    }
    if let Some(d_h) = args.d_h {
        config.encoder.d_h = d_h;
    }
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(lr) = args.lr {
        config.lr = lr;
    }
    if let Some(batch) = args.batch_size {
        config.batch_size = batch;
    }
    if let Some(f) = args.subsample_conj {
        config.subsample_conj = f;
    }
    if let Some(f) = args.subsample_next {
        config.subsample_next = f;
    }
    if args.tasks.is_some() {
        config.tasks = parse_tasks(&args.tasks)?;
    }
    config.validate().map_err(CliError::Usage)?;
    Ok(config)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildData(args) => {
            let stats = build_datasets(&BuildOptions {
                corpus_dir: args.corpus,
                out_dir: args.out,
                seed: args.seed,
                heldout_fraction: args.heldout,
                min_count: args.min_count,
                workers: args.workers,
            })?;
            print_json(&stats);
        }
        Command::Train(args) => {
            let config = resolve_train_config(&args)?;
            let outcome = run_training(&TrainOptions {
                data_dir: args.data,
                out_path: args.out,
                metrics_path: args.metrics,
                embeddings: args.embeddings,
                config,
                eval_every: args.eval_every,
                checkpoint_every: args.checkpoint_every,
            })?;
            print_json(&outcome);
        }
        Command::Eval(args) => {
            let tasks = parse_tasks(&args.tasks)?;
            let report = run_eval(&args.model, &args.data, &tasks)?;
            print_json(&report);
        }
        Command::Encode(args) => {
            let summary = run_encode(&args.model, &args.input, &args.out)?;
            print_json(&summary);
        }
        Command::Nn(args) => {
            let hits = run_nn(&args.model, &args.index, &args.query, args.k)?;
            for hit in hits {
                println!("{:.6}\t{}", hit.distance, hit.sentence);
            }
        }
        Command::Probe(args) => {
            let report = run_probe(
                &args.model,
                &args.train,
                &args.test,
                &ProbeConfig {
                    epochs: args.epochs,
                    lr: args.lr,
                    batch_size: args.batch_size,
                    seed: args.seed,
                },
            )?;
            print_json(&report);
        }
    }
    Ok(())
}
