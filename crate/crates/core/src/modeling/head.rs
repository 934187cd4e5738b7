use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::loss::sigmoid;
use super::optim::{AdamWConfig, AdamWState};
use crate::error::{Error, Result};
use crate::NUM_QUESTIONS;

/// Dropout, then a linear map from the pooled representation to one logit per
/// question. Scores are the elementwise sigmoid of the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationHead {
    pub dropout: f64,
    /// `(7, d)`
    pub weight: Array2<f64>,
    /// `(7,)`
    pub bias: Array1<f64>,
}

/// Activations kept from a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct HeadCache {
    /// Dropped-out and rescaled inputs that reached the projection.
    input: Array2<f64>,
    /// Per-element multiplier applied by dropout (0 or 1/(1-p)).
    mask: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct HeadGrads {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub input: Array2<f64>,
}

impl ClassificationHead {
    /// Weights drawn from N(0, 0.02²), zero bias.
    pub fn new(dim: usize, dropout: f64, rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(0.0, 0.02).expect("valid std");
        let weight = Array2::from_shape_simple_fn((NUM_QUESTIONS, dim), || normal.sample(rng));
        ClassificationHead {
            dropout,
            weight,
            bias: Array1::zeros(NUM_QUESTIONS),
        }
    }

    pub fn zeros(dim: usize, dropout: f64) -> Self {
        ClassificationHead {
            dropout,
            weight: Array2::zeros((NUM_QUESTIONS, dim)),
            bias: Array1::zeros(NUM_QUESTIONS),
        }
    }

    pub fn dim(&self) -> usize {
        self.weight.ncols()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "head expects width {}, got {}",
                self.dim(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Evaluation-mode logits (dropout disabled).
    pub fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        Ok(x.dot(&self.weight.t()) + &self.bias)
    }

    /// Evaluation-mode scores, each in (0, 1).
    pub fn scores(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.logits(x)?.mapv(score_from_logit))
    }

    /// Training-mode logits with inverted dropout drawn from `rng`.
    pub fn forward_train(
        &self,
        x: ArrayView2<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Array2<f64>, HeadCache)> {
        self.check_input(&x)?;
        let keep = 1.0 - self.dropout;
        let mask = if self.dropout > 0.0 {
            Array2::from_shape_simple_fn(x.raw_dim(), || {
                if rng.random::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
        } else {
            Array2::ones(x.raw_dim())
        };
        Ok(self.forward_with_mask(x, mask))
    }

    /// Forward pass with an explicit dropout multiplier mask.
    pub fn forward_with_mask(&self, x: ArrayView2<f64>, mask: Array2<f64>) -> (Array2<f64>, HeadCache) {
        let input = &x * &mask;
        let logits = input.dot(&self.weight.t()) + &self.bias;
        (logits, HeadCache { input, mask })
    }

    /// Gradients of the loss w.r.t. the head parameters and the head input,
    /// given `d loss / d logits`.
    pub fn backward(&self, cache: &HeadCache, grad_logits: ArrayView2<f64>) -> HeadGrads {
        HeadGrads {
            weight: grad_logits.t().dot(&cache.input),
            bias: grad_logits.sum_axis(Axis(0)),
            input: grad_logits.dot(&self.weight) * &cache.mask,
        }
    }

    /// Flat parameter vector: weights row-major, then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        self.weight.iter().chain(self.bias.iter()).copied().collect()
    }

    pub fn from_flat(dim: usize, dropout: f64, flat: &[f64]) -> Result<Self> {
        let n = NUM_QUESTIONS * dim;
        if flat.len() != n + NUM_QUESTIONS {
            return Err(Error::Shape(format!(
                "head blob has {} values, expected {}",
                flat.len(),
                n + NUM_QUESTIONS
            )));
        }
        Ok(ClassificationHead {
            dropout,
            weight: Array2::from_shape_vec((NUM_QUESTIONS, dim), flat[..n].to_vec())
                .expect("length checked"),
            bias: Array1::from(flat[n..].to_vec()),
        })
    }
}

/// Sigmoid clamped away from exactly 0 and 1.
pub fn score_from_logit(z: f64) -> f64 {
    sigmoid(z).clamp(1e-15, 1.0 - 1e-15)
}

/// AdamW state for the two head tensors.
#[derive(Debug, Clone)]
pub struct HeadOptimizer {
    weight: AdamWState,
    bias: AdamWState,
}

impl HeadOptimizer {
    pub fn new(head: &ClassificationHead) -> Self {
        HeadOptimizer {
            weight: AdamWState::new(head.weight.len()),
            bias: AdamWState::new(head.bias.len()),
        }
    }

    pub fn step(&mut self, cfg: &AdamWConfig, head: &mut ClassificationHead, grads: &HeadGrads) {
        self.weight.update(
            cfg,
            head.weight.as_slice_mut().expect("standard layout"),
            grads.weight.as_standard_layout().as_slice().expect("contiguous"),
        );
        self.bias.update(
            cfg,
            head.bias.as_slice_mut().expect("standard layout"),
            grads.bias.as_slice().expect("contiguous"),
        );
    }
}
