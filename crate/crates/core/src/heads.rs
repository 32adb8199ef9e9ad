//! Bilinear task heads. Sentence-pair tasks score class k as
//! aᵀ·M_k·b + w_k·[a;b] + c_k; the next-sentence task scores each
//! candidate as contextᵀ·W·candidate.
//!
//! Heads are zero-initialized so an untrained model starts at exactly
//! ln K loss per task.

use alloc::string::String;
use alloc::vec::Vec;

use crate::optim::{ParamId, ParamStore};
use crate::tape::{NodeId, Tape};
use crate::tensor::{Scalar, ShapeError, Tensor};

/// K-way classifier over a sentence pair: per class a bilinear form, a
/// linear term over the concatenated pair, and a bias.
#[derive(Clone, Debug)]
pub struct PairHead {
    pub classes: usize,
    pub dim: usize,
    ms: Vec<ParamId>,
    ws: Vec<ParamId>,
    cs: Vec<ParamId>,
}

impl PairHead {
    pub fn init_zero<S: Scalar>(
        store: &mut ParamStore<S>,
        name: &str,
        classes: usize,
        dim: usize,
    ) -> Self {
        let mut ms = Vec::with_capacity(classes);
        let mut ws = Vec::with_capacity(classes);
        let mut cs = Vec::with_capacity(classes);
        for k in 0..classes {
            ms.push(store.add(format_name(name, "m", k), Tensor::zeros(&[dim, dim])));
            ws.push(store.add(format_name(name, "w", k), Tensor::zeros(&[2 * dim, 1])));
            cs.push(store.add(format_name(name, "c", k), Tensor::zeros(&[1, 1])));
        }
        PairHead {
            classes,
            dim,
            ms,
            ws,
            cs,
        }
    }

    pub fn bilinear(&self, k: usize) -> ParamId {
        self.ms[k]
    }

    pub fn linear(&self, k: usize) -> ParamId {
        self.ws[k]
    }

    pub fn bias(&self, k: usize) -> ParamId {
        self.cs[k]
    }
}

fn format_name(head: &str, part: &str, k: usize) -> String {
    alloc::format!("head.{head}.{part}{k}")
}

/// Logits `[1, K]` for a sentence pair `(a, b)`, both `[1, D]`.
pub fn pair_logits<S: Scalar>(
    tape: &mut Tape<'_, S>,
    head: &PairHead,
    a: NodeId,
    b: NodeId,
) -> Result<NodeId, ShapeError> {
    let d = head.dim;
    let b_col = tape.reshape(b, &[d, 1])?;
    let ab = tape.concat(&[a, b]);
    let mut logits = Vec::with_capacity(head.classes);
    for k in 0..head.classes {
        let m = tape.param(head.ms[k]);
        let w = tape.param(head.ws[k]);
        let c = tape.param(head.cs[k]);
        let am = tape.matmul(a, m)?;
        let bilinear = tape.matmul(am, b_col)?;
        let linear = tape.matmul(ab, w)?;
        let sum = tape.add(bilinear, linear)?;
        logits.push(tape.add(sum, c)?);
    }
    Ok(tape.concat(&logits))
}

/// Candidate scorer for the next-sentence task: a single `[3D, D]`
/// interaction matrix between the concatenated context and each
/// candidate.
#[derive(Clone, Debug)]
pub struct NextHead {
    pub context_dim: usize,
    pub dim: usize,
    w: ParamId,
}

pub const NEXT_CANDIDATES: usize = 5;

impl NextHead {
    pub fn init_zero<S: Scalar>(store: &mut ParamStore<S>, dim: usize) -> Self {
        NextHead {
            context_dim: 3 * dim,
            dim,
            w: store.add("head.next.w", Tensor::zeros(&[3 * dim, dim])),
        }
    }

    pub fn weight(&self) -> ParamId {
        self.w
    }
}

/// The candidate list did not contain exactly five entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CardinalityError {
    pub expected: usize,
    pub got: usize,
}

impl core::fmt::Display for CardinalityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "expected {} candidates, got {}", self.expected, self.got)
    }
}

impl core::error::Error for CardinalityError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NextScoreError {
    Cardinality(CardinalityError),
    Shape(ShapeError),
}

impl From<ShapeError> for NextScoreError {
    fn from(e: ShapeError) -> Self {
        NextScoreError::Shape(e)
    }
}

impl core::fmt::Display for NextScoreError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NextScoreError::Cardinality(e) => write!(f, "{e}"),
            NextScoreError::Shape(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for NextScoreError {}

/// Scores `[1, 5]` for five candidates against a `[1, 3D]` context.
pub fn next_scores<S: Scalar>(
    tape: &mut Tape<'_, S>,
    head: &NextHead,
    context: NodeId,
    candidates: &[NodeId],
) -> Result<NodeId, NextScoreError> {
    if candidates.len() != NEXT_CANDIDATES {
        return Err(NextScoreError::Cardinality(CardinalityError {
            expected: NEXT_CANDIDATES,
            got: candidates.len(),
        }));
    }
    let w = tape.param(head.w);
    let projected = tape.matmul(context, w)?;
    let mut scores = Vec::with_capacity(NEXT_CANDIDATES);
    for &cand in candidates {
        let col = tape.reshape(cand, &[head.dim, 1])?;
        scores.push(tape.matmul(projected, col)?);
    }
    Ok(tape.concat(&scores))
}
