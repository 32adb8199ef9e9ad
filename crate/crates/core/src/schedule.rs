//! Deterministic multitask schedule.
//!
//! Subsampling factors are applied as batch frequencies, not dataset
//! truncation: task weights (1, 1/f_conj, 1/f_next) are realized by
//! stride scheduling, so with the default factors (4, 6) every 17-step
//! window contains exactly 12 ORDER, 3 CONJUNCTION, and 2 NEXT steps.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// The three training tasks. Ordering defines tie-breaks in the
/// schedule (ORDER before CONJUNCTION before NEXT).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Order,
    Conjunction,
    Next,
}

pub const ALL_TASKS: [TaskKind; 3] = [TaskKind::Order, TaskKind::Conjunction, TaskKind::Next];

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Order => "order",
            TaskKind::Conjunction => "conjunction",
            TaskKind::Next => "next",
        }
    }
}

impl core::str::FromStr for TaskKind {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "order" => Ok(TaskKind::Order),
            "conjunction" => Ok(TaskKind::Conjunction),
            "next" => Ok(TaskKind::Next),
            other => Err(alloc::format!("unknown task '{other}'")),
        }
    }
}

/// Stride scheduler: each task carries a pass value advanced by its
/// stride; the lowest pass value (ties broken by task order) runs next.
/// A task's long-run frequency is proportional to 1/stride.
#[derive(Clone, Debug)]
pub struct TaskSchedule {
    tasks: Vec<(TaskKind, u64)>,
    passes: Vec<u64>,
}

impl TaskSchedule {
    /// `enabled` must be nonempty and sorted by task order; factors
    /// must be at least 1. ORDER has stride 1, CONJUNCTION `f_conj`,
    /// NEXT `f_next`.
    pub fn new(enabled: &[TaskKind], f_conj: u32, f_next: u32) -> Self {
        assert!(!enabled.is_empty(), "schedule needs at least one task");
        assert!(f_conj >= 1 && f_next >= 1, "subsample factors must be >= 1");
        let mut tasks: Vec<(TaskKind, u64)> = enabled
            .iter()
            .map(|&t| {
                let stride = match t {
                    TaskKind::Order => 1u64,
                    TaskKind::Conjunction => f_conj as u64,
                    TaskKind::Next => f_next as u64,
                };
                (t, stride)
            })
            .collect();
        tasks.sort_by_key(|&(t, _)| t);
        tasks.dedup_by_key(|&mut (t, _)| t);
        let passes = tasks.iter().map(|&(_, stride)| stride).collect();
        TaskSchedule { tasks, passes }
    }

    pub fn with_defaults(enabled: &[TaskKind]) -> Self {
        TaskSchedule::new(enabled, 4, 6)
    }

    pub fn next_task(&mut self) -> TaskKind {
        let mut best = 0;
        for i in 1..self.passes.len() {
            if self.passes[i] < self.passes[best] {
                best = i;
            }
        }
        self.passes[best] += self.tasks[best].1;
        self.tasks[best].0
    }
}

impl Iterator for TaskSchedule {
    type Item = TaskKind;

    fn next(&mut self) -> Option<TaskKind> {
        Some(self.next_task())
    }
}
