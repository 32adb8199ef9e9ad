//! Dense row-major tensors over f32 or f64.
//!
//! Training runs in f32; gradient verification instantiates the same
//! code at f64. All transcendental functions go through `libm` so
//! results are identical on every platform. Reductions use fixed
//! ascending index order for bit-reproducibility.

use alloc::vec;
use alloc::vec::Vec;

/// Element type for tensors: f32 for training, f64 for checking.
pub trait Scalar:
    Copy
    + core::fmt::Debug
    + core::fmt::Display
    + PartialEq
    + PartialOrd
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
    + core::ops::Neg<Output = Self>
    + core::ops::AddAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f32 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn exp(self) -> Self {
        libm::expf(self)
    }
    fn ln(self) -> Self {
        libm::logf(self)
    }
    fn tanh(self) -> Self {
        libm::tanhf(self)
    }
    fn sqrt(self) -> Self {
        libm::sqrtf(self)
    }
    fn abs(self) -> Self {
        libm::fabsf(self)
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn ln(self) -> Self {
        libm::log(self)
    }
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// Logistic function.
pub fn sigmoid<S: Scalar>(x: S) -> S {
    S::ONE / (S::ONE + (-x).exp())
}

/// Elementwise nonlinearity used by the highway layer and GRU gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
}

impl ActivationKind {
    pub fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed in terms of the activation output `y`.
    pub fn derivative_from_output<S: Scalar>(self, y: S) -> S {
        match self {
            ActivationKind::Sigmoid => y * (S::ONE - y),
            ActivationKind::Tanh => S::ONE - y * y,
        }
    }
}

/// Two shapes that failed to combine under `op`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeError {
    pub op: &'static str,
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

impl core::fmt::Display for ShapeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}: incompatible shapes {:?} and {:?}",
            self.op, self.lhs, self.rhs
        )
    }
}

impl core::error::Error for ShapeError {}

/// Index out of range (e.g. a cross-entropy target beyond the logits).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexError {
    pub index: usize,
    pub len: usize,
}

impl core::fmt::Display for IndexError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "index {} out of range for length {}", self.index, self.len)
    }
}

impl core::error::Error for IndexError {}

/// Dense row-major tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![S::ZERO; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<S>) -> Result<Self, ShapeError> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(ShapeError {
                op: "from_vec",
                lhs: shape.to_vec(),
                rhs: vec![data.len()],
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// 1x1 tensor.
    pub fn scalar(value: S) -> Self {
        Tensor {
            shape: vec![1, 1],
            data: vec![value],
        }
    }

    /// Row vector [1, n].
    pub fn row(data: Vec<S>) -> Self {
        Tensor {
            shape: vec![1, data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[1]
    }

    pub fn get2(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols() + c]
    }

    pub fn set2(&mut self, r: usize, c: usize, value: S) {
        let cols = self.cols();
        self.data[r * cols + c] = value;
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, value: S) {
        self.data.fill(value);
    }

    /// Converts element type (f32 <-> f64) preserving shape.
    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| T::from_f64(v.to_f64())).collect(),
        }
    }
}

fn check_rank2<S: Scalar>(op: &'static str, t: &Tensor<S>) -> Result<(), ShapeError> {
    if t.shape().len() != 2 {
        return Err(ShapeError {
            op,
            lhs: t.shape().to_vec(),
            rhs: Vec::new(),
        });
    }
    Ok(())
}

/// C = A·B for rank-2 tensors [m,k]·[k,n]. The inner sum runs over k in
/// ascending order.
pub fn matmul<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Result<Tensor<S>, ShapeError> {
    check_rank2("matmul", a)?;
    check_rank2("matmul", b)?;
    if a.cols() != b.rows() {
        return Err(ShapeError {
            op: "matmul",
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut out = Tensor::zeros(&[m, n]);
    matmul_accumulate(a.data(), b.data(), out.data_mut(), m, k, n);
    Ok(out)
}

/// out[m,n] += a[m,k] · b[k,n], ascending-k accumulation.
pub(crate) fn matmul_accumulate<S: Scalar>(
    a: &[S],
    b: &[S],
    out: &mut [S],
    m: usize,
    k: usize,
    n: usize,
) {
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            let brow = &b[p * n..(p + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += aip * brow[j];
            }
        }
    }
}

/// out[m,k] += a[m,n] · b[k,n]ᵀ (contraction over n, ascending).
pub(crate) fn matmul_nt_accumulate<S: Scalar>(
    a: &[S],
    b: &[S],
    out: &mut [S],
    m: usize,
    n: usize,
    k: usize,
) {
    for i in 0..m {
        for j in 0..k {
            let mut acc = S::ZERO;
            let arow = &a[i * n..(i + 1) * n];
            let brow = &b[j * n..(j + 1) * n];
            for p in 0..n {
                acc += arow[p] * brow[p];
            }
            out[i * k + j] += acc;
        }
    }
}

/// out[k,n] += a[m,k]ᵀ · b[m,n] (contraction over m, ascending).
pub(crate) fn matmul_tn_accumulate<S: Scalar>(
    a: &[S],
    b: &[S],
    out: &mut [S],
    m: usize,
    k: usize,
    n: usize,
) {
    for p in 0..m {
        let arow = &a[p * k..(p + 1) * k];
        let brow = &b[p * n..(p + 1) * n];
        for i in 0..k {
            let api = arow[i];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += api * brow[j];
            }
        }
    }
}

/// Softmax cross-entropy with max-subtraction: returns the loss
/// `log Σ exp(logits) − logits[target]` and its gradient
/// `softmax(logits) − onehot(target)`.
pub fn softmax_cross_entropy<S: Scalar>(
    logits: &[S],
    target: usize,
) -> Result<(S, Vec<S>), IndexError> {
    if target >= logits.len() {
        return Err(IndexError {
            index: target,
            len: logits.len(),
        });
    }
    let mut max = logits[0];
    for &v in &logits[1..] {
        if v > max {
            max = v;
        }
    }
    let mut sum = S::ZERO;
    let mut probs: Vec<S> = Vec::with_capacity(logits.len());
    for &v in logits {
        let e = (v - max).exp();
        probs.push(e);
        sum += e;
    }
    let loss = sum.ln() + max - logits[target];
    let inv = S::ONE / sum;
    for p in probs.iter_mut() {
        *p = *p * inv;
    }
    probs[target] = probs[target] - S::ONE;
    Ok((loss, probs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let eye = t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let b = t(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(matmul(&eye, &b).unwrap(), b);
    }

    #[test]
    fn matmul_hand_example() {
        let a = t(&[1, 2], &[1.0, 2.0]);
        let b = t(&[2, 1], &[3.0, 4.0]);
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.shape(), &[1, 1]);
        assert_eq!(c.data(), &[11.0]);
    }

    #[test]
    fn matmul_matches_naive_triple_loop_exactly() {
        // Independent oracle: plain ijk triple loop, ascending k.
        let mut rng = crate::rng::Rng::new(17);
        let a_data: Vec<f32> = (0..12).map(|_| rng.next_range(-1.0, 1.0) as f32).collect();
        let b_data: Vec<f32> = (0..8).map(|_| rng.next_range(-1.0, 1.0) as f32).collect();
        let a = Tensor::from_vec(&[3, 4], a_data.clone()).unwrap();
        let b = Tensor::from_vec(&[4, 2], b_data.clone()).unwrap();
        let c = matmul(&a, &b).unwrap();

        let mut want = [0.0f32; 6];
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = 0.0f32;
                for k in 0..4 {
                    acc += a_data[i * 4 + k] * b_data[k * 2 + j];
                }
                want[i * 2 + j] = acc;
            }
        }
        assert_eq!(c.data(), &want);
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = t(&[2, 3], &[0.0; 6]);
        let b = t(&[2, 2], &[0.0; 4]);
        let err = matmul(&a, &b).unwrap_err();
        assert_eq!(err.lhs, vec![2, 3]);
        assert_eq!(err.rhs, vec![2, 2]);
    }

    #[test]
    fn activation_values() {
        assert_eq!(ActivationKind::Sigmoid.apply(0.0f64), 0.5);
        assert_eq!(ActivationKind::Tanh.apply(0.0f64), 0.0);
        // High-precision oracle value for sigmoid(3).
        let s = ActivationKind::Sigmoid.apply(3.0f64);
        assert!((s - 0.952574126822433).abs() < 1e-12, "sigmoid(3) = {s}");
    }

    #[test]
    fn cross_entropy_uniform_case() {
        let (loss, grad) = softmax_cross_entropy(&[0.0f64; 5], 2).unwrap();
        assert!((loss - 5.0f64.ln()).abs() < 1e-12);
        for (i, g) in grad.iter().enumerate() {
            let want = if i == 2 { -0.8 } else { 0.2 };
            assert!((g - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_shift_invariance() {
        let logits = [1.0f64, -0.5, 2.0];
        let (a, _) = softmax_cross_entropy(&logits, 1).unwrap();
        let shifted: Vec<f64> = logits.iter().map(|v| v + 7.5).collect();
        let (b, _) = softmax_cross_entropy(&shifted, 1).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_oracle_value() {
        // High-precision oracle: ln(e^2 + e^1 + e^0) - 2.
        let (loss, grad) = softmax_cross_entropy(&[2.0f64, 1.0, 0.0], 0).unwrap();
        assert!((loss - 0.407605964444).abs() < 1e-10, "loss = {loss}");
        let sum: f64 = grad.iter().sum();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_target_out_of_range() {
        let err = softmax_cross_entropy(&[0.0f64; 3], 3).unwrap_err();
        assert_eq!(err, IndexError { index: 3, len: 3 });
    }

    #[test]
    fn cast_round_trip_shape() {
        let a = t(&[2, 2], &[1.5, -2.0, 0.25, 3.0]);
        let b: Tensor<f32> = a.cast();
        assert_eq!(b.shape(), &[2, 2]);
        assert_eq!(b.data(), &[1.5f32, -2.0, 0.25, 3.0]);
    }
}
