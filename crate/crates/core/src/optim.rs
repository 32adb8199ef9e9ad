//! Trainable parameters, the AdaGrad update, and finite-difference
//! gradient verification.

use alloc::string::String;
use alloc::vec::Vec;

use crate::tensor::{Scalar, Tensor};

pub const ADAGRAD_EPS: f64 = 1e-8;
pub const GRAD_CHECK_STEP: f64 = 1e-5;

/// A value tensor with its gradient and AdaGrad squared-gradient
/// accumulator, all sharing one shape.
#[derive(Clone, Debug)]
pub struct Parameter<S> {
    pub value: Tensor<S>,
    pub grad: Tensor<S>,
    pub accumulator: Tensor<S>,
}

impl<S: Scalar> Parameter<S> {
    pub fn new(value: Tensor<S>) -> Self {
        let grad = Tensor::zeros(value.shape());
        let accumulator = Tensor::zeros(value.shape());
        Parameter {
            value,
            grad,
            accumulator,
        }
    }
}

/// Handle to a parameter in a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A gradient became non-finite; names the offending parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericsError {
    pub param: String,
}

impl core::fmt::Display for NumericsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "non-finite gradient in parameter '{}'", self.param)
    }
}

impl core::error::Error for NumericsError {}

/// Ordered collection of named parameters. Registration order is the
/// canonical order for updates and checkpoints.
#[derive(Clone, Debug, Default)]
pub struct ParamStore<S> {
    params: Vec<Parameter<S>>,
    names: Vec<String>,
}

impl<S: Scalar> ParamStore<S> {
    pub fn new() -> Self {
        ParamStore {
            params: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor<S>) -> ParamId {
        let name = name.into();
        debug_assert!(
            !self.names.contains(&name),
            "duplicate parameter name {name}"
        );
        self.params.push(Parameter::new(value));
        self.names.push(name);
        ParamId(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param(&self, id: ParamId) -> &Parameter<S> {
        &self.params[id.0]
    }

    pub fn param_mut(&mut self, id: ParamId) -> &mut Parameter<S> {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor<S> {
        &self.params[id.0].value
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    /// Adds `scale * grads` into the stored gradients.
    pub fn accumulate(&mut self, grads: &Gradients<S>, scale: S) {
        for (id, grad) in grads.iter() {
            let target = self.params[id.0].grad.data_mut();
            for (t, g) in target.iter_mut().zip(grad.data()) {
                *t += scale * *g;
            }
        }
    }

    /// One AdaGrad step over every parameter, then gradients are
    /// zeroed. Parameters with zero gradient are left untouched by the
    /// arithmetic (their accumulator gains zero).
    pub fn adagrad_step(&mut self, lr: f64, eps: f64) -> Result<(), NumericsError> {
        for i in 0..self.params.len() {
            adagrad_update(&mut self.params[i], lr, eps).map_err(|_| NumericsError {
                param: self.names[i].clone(),
            })?;
        }
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(S::ZERO);
        }
    }
}

/// Marker for a non-finite gradient detected inside `adagrad_update`;
/// the store wraps it with the parameter name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonFiniteGrad;

/// AdaGrad: `accumulator += grad²; value -= lr·grad/(√accumulator + eps)`,
/// then the gradient is zeroed. `eps` sits outside the square root.
pub fn adagrad_update<S: Scalar>(
    p: &mut Parameter<S>,
    lr: f64,
    eps: f64,
) -> Result<(), NonFiniteGrad> {
    if !p.grad.all_finite() {
        return Err(NonFiniteGrad);
    }
    let lr = S::from_f64(lr);
    let eps = S::from_f64(eps);
    let grad = p.grad.data_mut();
    let acc = p.accumulator.data_mut();
    let value = p.value.data_mut();
    for i in 0..grad.len() {
        let g = grad[i];
        acc[i] += g * g;
        value[i] = value[i] - lr * g / (acc[i].sqrt() + eps);
        grad[i] = S::ZERO;
    }
    Ok(())
}

/// Per-parameter gradient buffers produced by one backward pass.
#[derive(Clone, Debug)]
pub struct Gradients<S> {
    slots: Vec<Option<Tensor<S>>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn new(param_count: usize) -> Self {
        Gradients {
            slots: alloc::vec![None; param_count],
        }
    }

    pub fn add_to(&mut self, id: ParamId, shape: &[usize], contribution: &[S]) {
        let slot = &mut self.slots[id.0];
        let tensor = slot.get_or_insert_with(|| Tensor::zeros(shape));
        for (t, c) in tensor.data_mut().iter_mut().zip(contribution) {
            *t += *c;
        }
    }

    /// Adds a contribution to a contiguous row of the parameter
    /// (embedding-row gradients).
    pub fn add_to_row(&mut self, id: ParamId, shape: &[usize], row: usize, contribution: &[S]) {
        let slot = &mut self.slots[id.0];
        let tensor = slot.get_or_insert_with(|| Tensor::zeros(shape));
        let cols = contribution.len();
        let target = &mut tensor.data_mut()[row * cols..(row + 1) * cols];
        for (t, c) in target.iter_mut().zip(contribution) {
            *t += *c;
        }
    }

    pub fn get(&self, id: ParamId) -> Option<&Tensor<S>> {
        self.slots[id.0].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Tensor<S>)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| slot.as_ref().map(|t| (ParamId(i), t)))
    }

    /// Merges another gradient set into this one.
    pub fn merge(&mut self, other: &Gradients<S>) {
        for (id, grad) in other.iter() {
            self.add_to(id, grad.shape(), grad.data());
        }
    }
}

/// Result of a finite-difference sweep.
#[derive(Clone, Debug, Default)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub worst_coord: usize,
    pub coords_checked: usize,
}

/// Verifies analytic gradients against central differences
/// `(f(θ+h) − f(θ−h)) / 2h` for every coordinate of every parameter.
/// The relative error uses `|a−n| / max(|a|, |n|, 1e-8)`. Run this on
/// an f64 store; the pass threshold used by callers is 1e-4.
pub fn gradient_check<F>(store: &mut ParamStore<f64>, mut f: F, h: f64) -> GradCheckReport
where
    F: FnMut(&ParamStore<f64>) -> (f64, Gradients<f64>),
{
    let (_, analytic) = f(store);
    let mut report = GradCheckReport::default();
    for idx in 0..store.len() {
        let id = ParamId(idx);
        let coords = store.param(id).value.len();
        for c in 0..coords {
            let original = store.param(id).value.data()[c];
            store.param_mut(id).value.data_mut()[c] = original + h;
            let (loss_plus, _) = f(store);
            store.param_mut(id).value.data_mut()[c] = original - h;
            let (loss_minus, _) = f(store);
            store.param_mut(id).value.data_mut()[c] = original;

            let numeric = (loss_plus - loss_minus) / (2.0 * h);
            let a = analytic.get(id).map_or(0.0, |g| g.data()[c]);
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            let rel = (a - numeric).abs() / denom;
            report.coords_checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_param = store.name(id).into();
                report.worst_coord = c;
            }
        }
    }
    report
}
