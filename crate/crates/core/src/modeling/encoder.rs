use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand_chacha::ChaCha8Rng;

use super::optim::AdamWConfig;
use super::toy::ToyFactory;
use crate::error::{Error, Result};

/// A text encoder that maps token sequences to pooled vectors of a fixed
/// width and can be fine-tuned through externally supplied gradients.
///
/// Training is driven by the caller: [`encode_train`](Encoder::encode_train)
/// keeps whatever activations it needs, [`backward`](Encoder::backward)
/// accumulates parameter gradients from `d loss / d pooled`, and
/// [`step`](Encoder::step) applies one AdamW update and clears them.
pub trait Encoder: Send {
    /// Backend identifier, as used in configuration files.
    fn id(&self) -> &str;

    /// Width of the pooled representation.
    fn dim(&self) -> usize;

    /// The encoder's own tokenization, truncated to at most `max_len` ids.
    fn tokenize(&self, text: &str, max_len: usize) -> Vec<u32>;

    /// Evaluation-mode pooled representations, one row per sequence.
    fn encode(&self, batch: &[Vec<u32>]) -> Result<Array2<f64>>;

    /// Training-mode pooled representations (any internal dropout drawn from `rng`).
    fn encode_train(&mut self, batch: &[Vec<u32>], rng: &mut ChaCha8Rng) -> Result<Array2<f64>>;

    /// Accumulates parameter gradients for the most recent `encode_train`.
    fn backward(&mut self, grad_pooled: ArrayView2<f64>) -> Result<()>;

    /// Applies one optimizer update and clears accumulated gradients.
    fn step(&mut self, optim: &AdamWConfig) -> Result<()>;

    /// Writes the encoder parameters into `dir`.
    fn save(&self, dir: &Path) -> Result<()>;

    /// Deep copy of the current parameters (optimizer state not required).
    fn snapshot(&self) -> Result<Box<dyn Encoder>>;
}

/// Creates or restores encoders for the identifiers it recognises.
pub trait EncoderFactory: Send + Sync {
    /// A fresh encoder ready for fine-tuning, or `None` if `id` is not served here.
    fn create(&self, id: &str, seed: u64) -> Result<Option<Box<dyn Encoder>>>;

    /// An encoder restored from a checkpoint directory written by [`Encoder::save`].
    fn load(&self, id: &str, dir: &Path) -> Result<Option<Box<dyn Encoder>>>;
}

/// Ordered list of factories; the first one that recognises an id wins.
pub struct Registry {
    factories: Vec<Box<dyn EncoderFactory>>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry {
            factories: vec![Box::new(ToyFactory)],
        }
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            factories: Vec::new(),
        }
    }

    pub fn register(&mut self, factory: Box<dyn EncoderFactory>) -> &mut Self {
        self.factories.push(factory);
        self
    }

    pub fn create(&self, id: &str, seed: u64) -> Result<Box<dyn Encoder>> {
        for f in &self.factories {
            if let Some(enc) = f.create(id, seed)? {
                return Ok(enc);
            }
        }
        Err(Error::UnknownBackend(id.to_string()))
    }

    pub fn load(&self, id: &str, dir: &Path) -> Result<Box<dyn Encoder>> {
        for f in &self.factories {
            if let Some(enc) = f.load(id, dir)? {
                return Ok(enc);
            }
        }
        Err(Error::UnknownBackend(id.to_string()))
    }
}
