//! Joint training loop over in-memory datasets, plus intrinsic
//! (per-task accuracy) evaluation.
//!
//! Training is a pure function of (config, datasets, seed): batches are
//! drawn by reshuffling each task's dataset per epoch with a seeded
//! generator, gradients are reduced in fixed example order, and every
//! update is deterministic.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderConfig, EncoderKind};
use crate::model::{EncodedConjunction, EncodedNext, EncodedOrder, Model, ModelError};
use crate::optim::{Gradients, NumericsError, ADAGRAD_EPS};
use crate::rng::{derive_seed, Rng};
use crate::schedule::{TaskKind, TaskSchedule, ALL_TASKS};
use crate::tape::Tape;
use crate::tensor::Scalar;

/// Training hyperparameters. Exposed one-to-one as CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub encoder: EncoderConfig,
    pub lr: f64,
    pub batch_size: usize,
    pub steps: u64,
    pub seed: u64,
    pub subsample_conj: u32,
    pub subsample_next: u32,
    pub tasks: Vec<TaskKind>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            encoder: EncoderConfig::defaults(EncoderKind::Bigru),
            lr: 0.01,
            batch_size: 64,
            steps: 1000,
            seed: 0,
            subsample_conj: 4,
            subsample_next: 6,
            tasks: ALL_TASKS.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.lr <= 0.0 {
            return Err("lr must be positive".into());
        }
        if self.batch_size == 0 {
            return Err("batch_size must be at least 1".into());
        }
        if self.subsample_conj < 1 || self.subsample_next < 1 {
            return Err("subsample factors must be at least 1".into());
        }
        if self.tasks.is_empty() {
            return Err("at least one task must be enabled".into());
        }
        let mut sorted = self.tasks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.tasks.len() {
            return Err("duplicate task in task list".into());
        }
        Ok(())
    }
}

/// In-memory datasets, already mapped to vocabulary ids.
#[derive(Clone, Debug, Default)]
pub struct TaskData {
    pub order: Vec<EncodedOrder>,
    pub conjunction: Vec<EncodedConjunction>,
    pub next: Vec<EncodedNext>,
}

impl TaskData {
    pub fn len_for(&self, task: TaskKind) -> usize {
        match task {
            TaskKind::Order => self.order.len(),
            TaskKind::Conjunction => self.conjunction.len(),
            TaskKind::Next => self.next.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    Model(ModelError),
    Numerics(NumericsError),
    EmptyDataset(TaskKind),
    BadConfig(String),
}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

impl From<NumericsError> for TrainError {
    fn from(e: NumericsError) -> Self {
        TrainError::Numerics(e)
    }
}

impl core::fmt::Display for TrainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TrainError::Model(e) => write!(f, "{e}"),
            TrainError::Numerics(e) => write!(f, "{e}"),
            TrainError::EmptyDataset(t) => {
                write!(f, "no training examples for task '{}'", t.as_str())
            }
            TrainError::BadConfig(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl core::error::Error for TrainError {}

/// Per-epoch reshuffled index stream for one task.
#[derive(Clone, Debug)]
struct Sampler {
    order: Vec<usize>,
    cursor: usize,
    rng: Rng,
}

impl Sampler {
    fn new(len: usize, mut rng: Rng) -> Self {
        let mut order: Vec<usize> = (0..len).collect();
        rng.shuffle(&mut order);
        Sampler {
            order,
            cursor: 0,
            rng,
        }
    }

    fn draw(&mut self, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            if self.cursor == self.order.len() {
                self.rng.shuffle(&mut self.order);
                self.cursor = 0;
            }
            out.push(self.order[self.cursor]);
            self.cursor += 1;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepInfo {
    pub step: u64,
    pub task: TaskKind,
    pub loss: f64,
}

#[derive(Clone, Debug)]
pub struct Trainer<S: Scalar> {
    pub model: Model<S>,
    pub config: TrainConfig,
    pub data: TaskData,
    schedule: TaskSchedule,
    samplers: [Option<Sampler>; 3],
    step: u64,
}

impl<S: Scalar> Trainer<S> {
    pub fn new(model: Model<S>, config: TrainConfig, data: TaskData) -> Result<Self, TrainError> {
        config.validate().map_err(TrainError::BadConfig)?;
        let mut samplers: [Option<Sampler>; 3] = [None, None, None];
        for &task in &config.tasks {
            let len = data.len_for(task);
            if len == 0 {
                return Err(TrainError::EmptyDataset(task));
            }
            let seed = derive_seed(config.seed, &[b"sampler", task.as_str().as_bytes()]);
            samplers[task as usize] = Some(Sampler::new(len, Rng::new(seed)));
        }
        let schedule = TaskSchedule::new(&config.tasks, config.subsample_conj, config.subsample_next);
        Ok(Trainer {
            model,
            config,
            data,
            schedule,
            samplers,
            step: 0,
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Runs one scheduled step: pick the task, draw a batch, update.
    pub fn train_step(&mut self) -> Result<StepInfo, TrainError> {
        let task = self.schedule.next_task();
        let indices = self.samplers[task as usize]
            .as_mut()
            .expect("enabled task has a sampler")
            .draw(self.config.batch_size);
        self.train_step_on(task, &indices)
    }

    /// One gradient step on explicit example indices of one task. The
    /// loss is the batch mean cross-entropy.
    pub fn train_step_on(
        &mut self,
        task: TaskKind,
        indices: &[usize],
    ) -> Result<StepInfo, TrainError> {
        assert!(!indices.is_empty(), "batch must be nonempty");
        let mut total = Gradients::new(self.model.store.len());
        let mut loss_sum = 0.0f64;
        for &i in indices {
            let mut tape = Tape::new(&self.model.store);
            let loss = match task {
                TaskKind::Order => self.model.order_loss(&mut tape, &self.data.order[i])?,
                TaskKind::Conjunction => {
                    self.model
                        .conjunction_loss(&mut tape, &self.data.conjunction[i])?
                }
                TaskKind::Next => self.model.next_loss(&mut tape, &self.data.next[i])?,
            };
            loss_sum += tape.scalar_value(loss).to_f64();
            let grads = tape.backward(loss);
            total.merge(&grads);
        }
        let scale = S::from_f64(1.0 / indices.len() as f64);
        self.model.store.accumulate(&total, scale);
        self.model.store.adagrad_step(self.config.lr, ADAGRAD_EPS)?;
        self.step += 1;
        Ok(StepInfo {
            step: self.step,
            task,
            loss: loss_sum / indices.len() as f64,
        })
    }
}

/// Accuracy of one task against its chance baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskEval {
    pub accuracy: f64,
    pub chance: f64,
    pub examples: usize,
}

/// Per-task intrinsic accuracies; `None` for tasks not evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<TaskEval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjunction: Option<TaskEval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next: Option<TaskEval>,
}

impl IntrinsicReport {
    pub fn for_task(&self, task: TaskKind) -> Option<TaskEval> {
        match task {
            TaskKind::Order => self.order,
            TaskKind::Conjunction => self.conjunction,
            TaskKind::Next => self.next,
        }
    }
}

/// A requested task had no evaluation examples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalError {
    pub task: TaskKind,
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "no evaluation examples for task '{}'", self.task.as_str())
    }
}

impl core::error::Error for EvalError {}

/// Argmax accuracy per requested task, with chance baselines: 0.5 for
/// ORDER, 0.2 for NEXT, and the majority-category frequency for
/// CONJUNCTION.
pub fn evaluate_intrinsic<S: Scalar>(
    model: &Model<S>,
    data: &TaskData,
    tasks: &[TaskKind],
) -> Result<IntrinsicReport, EvalError> {
    let mut report = IntrinsicReport::default();
    for &task in tasks {
        if data.len_for(task) == 0 {
            return Err(EvalError { task });
        }
        let eval = match task {
            TaskKind::Order => {
                let mut correct = 0usize;
                for ex in &data.order {
                    if model.predict_order(ex).map_err(|_| EvalError { task })? == ex.swapped {
                        correct += 1;
                    }
                }
                TaskEval {
                    accuracy: correct as f64 / data.order.len() as f64,
                    chance: 0.5,
                    examples: data.order.len(),
                }
            }
            TaskKind::Conjunction => {
                let mut correct = 0usize;
                let mut per_category = [0usize; crate::discourse::CATEGORY_COUNT];
                for ex in &data.conjunction {
                    per_category[ex.category] += 1;
                    if model
                        .predict_conjunction(ex)
                        .map_err(|_| EvalError { task })?
                        == ex.category
                    {
                        correct += 1;
                    }
                }
                let majority = per_category.iter().copied().max().unwrap_or(0);
                TaskEval {
                    accuracy: correct as f64 / data.conjunction.len() as f64,
                    chance: majority as f64 / data.conjunction.len() as f64,
                    examples: data.conjunction.len(),
                }
            }
            TaskKind::Next => {
                let mut correct = 0usize;
                for ex in &data.next {
                    if model.predict_next(ex).map_err(|_| EvalError { task })? == ex.answer {
                        correct += 1;
                    }
                }
                TaskEval {
                    accuracy: correct as f64 / data.next.len() as f64,
                    chance: 0.2,
                    examples: data.next.len(),
                }
            }
        };
        match task {
            TaskKind::Order => report.order = Some(eval),
            TaskKind::Conjunction => report.conjunction = Some(eval),
            TaskKind::Next => report.next = Some(eval),
        }
    }
    Ok(report)
}
