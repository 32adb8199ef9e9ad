//! Linear probe: multinomial logistic regression over frozen sentence
//! encodings, trained with AdaGrad for a fixed number of epochs.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::argmax;
use crate::optim::{adagrad_update, Parameter, ADAGRAD_EPS};
use crate::rng::{derive_seed, Rng};
use crate::tensor::{softmax_cross_entropy, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            epochs: 100,
            lr: 0.1,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeError {
    EmptySet,
    SingleClass,
    LabelOutOfRange { label: usize, classes: usize },
    InconsistentDimension,
}

impl core::fmt::Display for ProbeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProbeError::EmptySet => write!(f, "probe requires nonempty train and test sets"),
            ProbeError::SingleClass => {
                write!(f, "probe training set contains a single class")
            }
            ProbeError::LabelOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            ProbeError::InconsistentDimension => {
                write!(f, "feature vectors have inconsistent dimensions")
            }
        }
    }
}

impl core::error::Error for ProbeError {}

/// Pair featurization for sentence-pair probes:
/// `[a; b; |a−b|; a⊙b]`.
pub fn pair_features(a: &[f32], b: &[f32]) -> Vec<f32> {
    debug_assert_eq!(a.len(), b.len());
    let mut out = Vec::with_capacity(4 * a.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.extend(a.iter().zip(b).map(|(x, y)| (x - y).abs()));
    out.extend(a.iter().zip(b).map(|(x, y)| x * y));
    out
}

/// Trains a softmax classifier on `train` and reports train/test
/// accuracy. Deterministic given the config seed.
pub fn linear_probe(
    train: &[(Vec<f32>, usize)],
    test: &[(Vec<f32>, usize)],
    config: &ProbeConfig,
) -> Result<ProbeReport, ProbeError> {
    if train.is_empty() || test.is_empty() {
        return Err(ProbeError::EmptySet);
    }
    let dim = train[0].0.len();
    if train.iter().chain(test).any(|(x, _)| x.len() != dim) {
        return Err(ProbeError::InconsistentDimension);
    }
    let classes = train
        .iter()
        .chain(test)
        .map(|(_, y)| y + 1)
        .max()
        .expect("nonempty");
    {
        let mut seen = vec![false; classes];
        for (_, y) in train {
            seen[*y] = true;
        }
        if seen.iter().filter(|s| **s).count() < 2 {
            return Err(ProbeError::SingleClass);
        }
    }

    let mut weights = Parameter::new(Tensor::<f64>::zeros(&[dim, classes]));
    let mut bias = Parameter::new(Tensor::<f64>::zeros(&[1, classes]));
    let mut rng = Rng::new(derive_seed(config.seed, &[b"probe"]));
    let mut order: Vec<usize> = (0..train.len()).collect();

    for _ in 0..config.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(config.batch_size.max(1)) {
            for &i in batch {
                let (x, y) = &train[i];
                let logits = scores(weights.value.data(), bias.value.data(), x, dim, classes);
                let (_, dlogits) =
                    softmax_cross_entropy(&logits, *y).expect("label checked above");
                let scale = 1.0 / batch.len() as f64;
                let wgrad = weights.grad.data_mut();
                for (r, xv) in x.iter().enumerate() {
                    let xv = *xv as f64 * scale;
                    for (c, d) in dlogits.iter().enumerate() {
                        wgrad[r * classes + c] += xv * d;
                    }
                }
                let bgrad = bias.grad.data_mut();
                for (c, d) in dlogits.iter().enumerate() {
                    bgrad[c] += scale * d;
                }
            }
            adagrad_update(&mut weights, config.lr, ADAGRAD_EPS).expect("finite features");
            adagrad_update(&mut bias, config.lr, ADAGRAD_EPS).expect("finite features");
        }
    }

    let accuracy = |set: &[(Vec<f32>, usize)]| {
        let correct = set
            .iter()
            .filter(|(x, y)| {
                let logits = scores(weights.value.data(), bias.value.data(), x, dim, classes);
                argmax(&logits) == *y
            })
            .count();
        correct as f64 / set.len() as f64
    };

    Ok(ProbeReport {
        train_accuracy: accuracy(train),
        test_accuracy: accuracy(test),
        classes,
    })
}

fn scores(weights: &[f64], bias: &[f64], x: &[f32], dim: usize, classes: usize) -> Vec<f64> {
    let mut logits = bias.to_vec();
    for r in 0..dim {
        let xv = x[r] as f64;
        for c in 0..classes {
            logits[c] += xv * weights[r * classes + c];
        }
    }
    logits
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two well-separated clusters in 4-d feature space.
    fn clusters(n: usize, seed: u64) -> Vec<(Vec<f32>, usize)> {
        let mut rng = Rng::new(seed);
        let mut out = Vec::with_capacity(2 * n);
        for label in 0..2usize {
            let center = if label == 0 { -2.0 } else { 2.0 };
            for _ in 0..n {
                let x: Vec<f32> = (0..4)
                    .map(|_| (center + rng.next_range(-0.5, 0.5)) as f32)
                    .collect();
                out.push((x, label));
            }
        }
        out
    }

    #[test]
    fn separable_clusters_reach_high_accuracy() {
        let train = clusters(40, 1);
        let test = clusters(20, 2);
        let report = linear_probe(&train, &test, &ProbeConfig::default()).unwrap();
        assert!(report.train_accuracy >= 0.95, "{}", report.train_accuracy);
        assert!(report.test_accuracy >= 0.95, "{}", report.test_accuracy);
        assert_eq!(report.classes, 2);
    }

    #[test]
    fn single_class_train_set_is_rejected() {
        let train: Vec<(Vec<f32>, usize)> = (0..10).map(|_| (vec![0.0, 1.0], 1)).collect();
        let test = vec![(vec![0.0f32, 1.0], 1)];
        assert_eq!(
            linear_probe(&train, &test, &ProbeConfig::default()).unwrap_err(),
            ProbeError::SingleClass
        );
    }

    #[test]
    fn empty_sets_are_rejected() {
        let set = vec![(vec![0.0f32], 0), (vec![1.0f32], 1)];
        assert_eq!(
            linear_probe(&[], &set, &ProbeConfig::default()).unwrap_err(),
            ProbeError::EmptySet
        );
        assert_eq!(
            linear_probe(&set, &[], &ProbeConfig::default()).unwrap_err(),
            ProbeError::EmptySet
        );
    }

    #[test]
    fn probe_is_deterministic() {
        let train = clusters(20, 3);
        let test = clusters(10, 4);
        let a = linear_probe(&train, &test, &ProbeConfig::default()).unwrap();
        let b = linear_probe(&train, &test, &ProbeConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perfect_predictions_give_accuracy_one() {
        // Labels perfectly aligned with a single coordinate's sign.
        let train: Vec<(Vec<f32>, usize)> = (0..20)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                (vec![sign, 0.0], (i % 2) as usize)
            })
            .collect();
        let report = linear_probe(&train, &train, &ProbeConfig::default()).unwrap();
        assert_eq!(report.test_accuracy, 1.0);
    }

    #[test]
    fn pair_features_layout() {
        let f = pair_features(&[1.0, 2.0], &[3.0, -1.0]);
        assert_eq!(f, vec![1.0, 2.0, 3.0, -1.0, 2.0, 3.0, 3.0, -2.0]);
    }

    #[test]
    fn inconsistent_dimensions_are_rejected() {
        let train = vec![(vec![0.0f32, 1.0], 0), (vec![1.0f32], 1)];
        let test = vec![(vec![0.0f32, 1.0], 0)];
        assert_eq!(
            linear_probe(&train, &test, &ProbeConfig::default()).unwrap_err(),
            ProbeError::InconsistentDimension
        );
    }
}
