//! Reverse-mode differentiation on a recorded computation tape.
//!
//! Each operation carries its own backward rule; there is no general
//! symbolic system. Values are computed eagerly during recording;
//! `backward` walks the tape once in reverse and returns gradients for
//! every parameter node it reaches. Parameter values are read from the
//! owning [`ParamStore`] by reference, so recording a step does not
//! copy weight matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::optim::{Gradients, ParamId, ParamStore};
use crate::tensor::{
    matmul_accumulate, matmul_nt_accumulate, matmul_tn_accumulate, softmax_cross_entropy,
    ActivationKind, IndexError, Scalar, ShapeError, Tensor,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op {
    Const,
    Param(ParamId),
    ParamRow(ParamId, usize),
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Act(ActivationKind, NodeId),
    Concat(Vec<NodeId>),
    Reshape(NodeId),
    SoftmaxCrossEntropy(NodeId, usize),
}

struct Node<S> {
    op: Op,
    shape: Vec<usize>,
    /// Owned output values; empty for Param/ParamRow nodes, whose data
    /// lives in the store.
    data: Vec<S>,
}

pub struct Tape<'s, S: Scalar> {
    store: &'s ParamStore<S>,
    nodes: Vec<Node<S>>,
}

impl<'s, S: Scalar> Tape<'s, S> {
    pub fn new(store: &'s ParamStore<S>) -> Self {
        Tape {
            store,
            nodes: Vec::new(),
        }
    }

    pub fn store(&self) -> &ParamStore<S> {
        self.store
    }

    fn push(&mut self, op: Op, shape: Vec<usize>, data: Vec<S>) -> NodeId {
        self.nodes.push(Node { op, shape, data });
        NodeId(self.nodes.len() - 1)
    }

    pub fn data_of(&self, id: NodeId) -> &[S] {
        let node = &self.nodes[id.0];
        match node.op {
            Op::Param(pid) => self.store.value(pid).data(),
            Op::ParamRow(pid, row) => {
                let t = self.store.value(pid);
                let cols = t.cols();
                &t.data()[row * cols..(row + 1) * cols]
            }
            _ => &node.data,
        }
    }

    pub fn shape_of(&self, id: NodeId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    /// Value of a 1x1 node.
    pub fn scalar_value(&self, id: NodeId) -> S {
        self.data_of(id)[0]
    }

    pub fn value_tensor(&self, id: NodeId) -> Tensor<S> {
        Tensor::from_vec(self.shape_of(id), self.data_of(id).to_vec())
            .expect("node shape is consistent")
    }

    pub fn constant(&mut self, t: Tensor<S>) -> NodeId {
        let shape = t.shape().to_vec();
        let data = t.into_data();
        self.push(Op::Const, shape, data)
    }

    pub fn zeros(&mut self, shape: &[usize]) -> NodeId {
        let len = shape.iter().product();
        self.push(Op::Const, shape.to_vec(), vec![S::ZERO; len])
    }

    /// The whole parameter tensor as a leaf node.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        let shape = self.store.value(id).shape().to_vec();
        self.push(Op::Param(id), shape, Vec::new())
    }

    /// One row of a rank-2 parameter as a `[1, cols]` leaf.
    pub fn param_row(&mut self, id: ParamId, row: usize) -> NodeId {
        let cols = self.store.value(id).cols();
        self.push(Op::ParamRow(id, row), vec![1, cols], Vec::new())
    }

    fn rank2(&self, op: &'static str, id: NodeId) -> Result<(usize, usize), ShapeError> {
        let shape = self.shape_of(id);
        if shape.len() != 2 {
            return Err(ShapeError {
                op,
                lhs: shape.to_vec(),
                rhs: Vec::new(),
            });
        }
        Ok((shape[0], shape[1]))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ShapeError> {
        let (m, ka) = self.rank2("matmul", a)?;
        let (kb, n) = self.rank2("matmul", b)?;
        if ka != kb {
            return Err(ShapeError {
                op: "matmul",
                lhs: self.shape_of(a).to_vec(),
                rhs: self.shape_of(b).to_vec(),
            });
        }
        let mut out = vec![S::ZERO; m * n];
        matmul_accumulate(self.data_of(a), self.data_of(b), &mut out, m, ka, n);
        Ok(self.push(Op::MatMul(a, b), vec![m, n], out))
    }

    fn same_shape(
        &self,
        op: &'static str,
        a: NodeId,
        b: NodeId,
    ) -> Result<Vec<usize>, ShapeError> {
        if self.shape_of(a) != self.shape_of(b) {
            return Err(ShapeError {
                op,
                lhs: self.shape_of(a).to_vec(),
                rhs: self.shape_of(b).to_vec(),
            });
        }
        Ok(self.shape_of(a).to_vec())
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ShapeError> {
        let shape = self.same_shape("add", a, b)?;
        let out: Vec<S> = self
            .data_of(a)
            .iter()
            .zip(self.data_of(b))
            .map(|(&x, &y)| x + y)
            .collect();
        Ok(self.push(Op::Add(a, b), shape, out))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ShapeError> {
        let shape = self.same_shape("sub", a, b)?;
        let out: Vec<S> = self
            .data_of(a)
            .iter()
            .zip(self.data_of(b))
            .map(|(&x, &y)| x - y)
            .collect();
        Ok(self.push(Op::Sub(a, b), shape, out))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ShapeError> {
        let shape = self.same_shape("mul", a, b)?;
        let out: Vec<S> = self
            .data_of(a)
            .iter()
            .zip(self.data_of(b))
            .map(|(&x, &y)| x * y)
            .collect();
        Ok(self.push(Op::Mul(a, b), shape, out))
    }

    pub fn activation(&mut self, kind: ActivationKind, a: NodeId) -> NodeId {
        let shape = self.shape_of(a).to_vec();
        let out: Vec<S> = self.data_of(a).iter().map(|&x| kind.apply(x)).collect();
        self.push(Op::Act(kind, a), shape, out)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.activation(ActivationKind::Sigmoid, a)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.activation(ActivationKind::Tanh, a)
    }

    /// Flat concatenation into a `[1, total]` row.
    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(self.data_of(p));
        }
        let total = out.len();
        self.push(Op::Concat(parts.to_vec()), vec![1, total], out)
    }

    pub fn reshape(&mut self, a: NodeId, shape: &[usize]) -> Result<NodeId, ShapeError> {
        let len: usize = shape.iter().product();
        if len != self.data_of(a).len() {
            return Err(ShapeError {
                op: "reshape",
                lhs: self.shape_of(a).to_vec(),
                rhs: shape.to_vec(),
            });
        }
        let data = self.data_of(a).to_vec();
        Ok(self.push(Op::Reshape(a), shape.to_vec(), data))
    }

    /// Scalar loss node: `log Σ exp(logits) − logits[target]`.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: NodeId,
        target: usize,
    ) -> Result<NodeId, IndexError> {
        let (loss, _) = softmax_cross_entropy(self.data_of(logits), target)?;
        Ok(self.push(
            Op::SoftmaxCrossEntropy(logits, target),
            vec![1, 1],
            vec![loss],
        ))
    }

    /// Reverse pass from a 1x1 loss node (seeded with 1). Returns
    /// accumulated gradients for every parameter the loss depends on.
    pub fn backward(&self, loss: NodeId) -> Gradients<S> {
        debug_assert_eq!(self.data_of(loss).len(), 1, "backward seed must be scalar");
        let mut node_grads: Vec<Option<Vec<S>>> = vec![None; self.nodes.len()];
        node_grads[loss.0] = Some(vec![S::ONE]);
        let mut param_grads = Gradients::new(self.store.len());

        for idx in (0..=loss.0).rev() {
            let Some(grad) = node_grads[idx].take() else {
                continue;
            };
            match &self.nodes[idx].op {
                Op::Const => {}
                Op::Param(pid) => {
                    param_grads.add_to(*pid, self.store.value(*pid).shape(), &grad);
                }
                Op::ParamRow(pid, row) => {
                    param_grads.add_to_row(*pid, self.store.value(*pid).shape(), *row, &grad);
                }
                Op::MatMul(a, b) => {
                    let (m, k) = (self.shape_of(*a)[0], self.shape_of(*a)[1]);
                    let n = self.shape_of(*b)[1];
                    {
                        let b_data = self.data_of(*b);
                        let da = slot(&mut node_grads, *a, m * k);
                        matmul_nt_accumulate(&grad, b_data, da, m, n, k);
                    }
                    {
                        let a_data = self.data_of(*a);
                        let db = slot(&mut node_grads, *b, k * n);
                        matmul_tn_accumulate(a_data, &grad, db, m, k, n);
                    }
                }
                Op::Add(a, b) => {
                    add_into(slot(&mut node_grads, *a, grad.len()), &grad, S::ONE);
                    add_into(slot(&mut node_grads, *b, grad.len()), &grad, S::ONE);
                }
                Op::Sub(a, b) => {
                    add_into(slot(&mut node_grads, *a, grad.len()), &grad, S::ONE);
                    add_into(slot(&mut node_grads, *b, grad.len()), &grad, -S::ONE);
                }
                Op::Mul(a, b) => {
                    {
                        let b_data = self.data_of(*b).to_vec();
                        let da = slot(&mut node_grads, *a, grad.len());
                        for i in 0..grad.len() {
                            da[i] += grad[i] * b_data[i];
                        }
                    }
                    {
                        let a_data = self.data_of(*a).to_vec();
                        let db = slot(&mut node_grads, *b, grad.len());
                        for i in 0..grad.len() {
                            db[i] += grad[i] * a_data[i];
                        }
                    }
                }
                Op::Act(kind, a) => {
                    let y = &self.nodes[idx].data;
                    let da = slot(&mut node_grads, *a, grad.len());
                    for i in 0..grad.len() {
                        da[i] += grad[i] * kind.derivative_from_output(y[i]);
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.data_of(p).len();
                        add_into(
                            slot(&mut node_grads, p, len),
                            &grad[offset..offset + len],
                            S::ONE,
                        );
                        offset += len;
                    }
                }
                Op::Reshape(a) => {
                    add_into(slot(&mut node_grads, *a, grad.len()), &grad, S::ONE);
                }
                Op::SoftmaxCrossEntropy(logits, target) => {
                    let (_, dlogits) = softmax_cross_entropy(self.data_of(*logits), *target)
                        .expect("target validated at record time");
                    let g0 = grad[0];
                    let dl = slot(&mut node_grads, *logits, dlogits.len());
                    for i in 0..dlogits.len() {
                        dl[i] += g0 * dlogits[i];
                    }
                }
            }
        }
        param_grads
    }
}

fn slot<S: Scalar>(grads: &mut [Option<Vec<S>>], id: NodeId, len: usize) -> &mut [S] {
    grads[id.0]
        .get_or_insert_with(|| vec![S::ZERO; len])
        .as_mut_slice()
}

fn add_into<S: Scalar>(target: &mut [S], source: &[S], scale: S) {
    for (t, s) in target.iter_mut().zip(source) {
        *t += scale * *s;
    }
}
