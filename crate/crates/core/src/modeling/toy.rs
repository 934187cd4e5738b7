//! A small self-contained encoder for tests and desk-scale runs.
//!
//! Words are hashed into a fixed number of buckets, each bucket owns a
//! trainable embedding, the embeddings of a tweet are mean-pooled and passed
//! through one `tanh` feed-forward layer of width `dim`.
//!
//! The stored parameters are scaled down by `param_scale` and multiplied back
//! in the forward pass, and the output is multiplied by `output_gain`. Adam's
//! steps are invariant to parameter scale, so this lets the fixed fine-tuning
//! learning rate move a model of this size about as far per step as it moves
//! a large pretrained encoder.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::encoder::{Encoder, EncoderFactory};
use super::optim::{AdamWConfig, AdamWState};
use crate::error::{Error, Result};
use crate::io;

pub const TOY_ID: &str = "toy";

const CONFIG_FILE: &str = "encoder.json";
const BLOB_FILE: &str = "encoder.bin";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    pub buckets: usize,
    pub embed_dim: usize,
    pub dim: usize,
    pub param_scale: f64,
    pub output_gain: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            buckets: 4096,
            embed_dim: 256,
            dim: 32,
            param_scale: 100.0,
            output_gain: 20.0,
        }
    }
}

struct Cache {
    batch: Vec<Vec<u32>>,
    pooled: Array2<f64>,
    act: Array2<f64>,
}

struct Grads {
    emb: Array2<f64>,
    w1: Array2<f64>,
    b1: Array1<f64>,
}

struct Optim {
    emb: AdamWState,
    w1: AdamWState,
    b1: AdamWState,
}

pub struct ToyEncoder {
    config: ToyConfig,
    /// `(buckets, embed_dim)`, stored divided by `param_scale`.
    emb: Array2<f64>,
    /// `(dim, embed_dim)`, stored divided by `param_scale`.
    w1: Array2<f64>,
    b1: Array1<f64>,
    cache: Option<Cache>,
    grads: Option<Grads>,
    optim: Option<Optim>,
}

impl ToyEncoder {
    pub fn new(config: ToyConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = config.param_scale;
        let w_std = 1.0 / (config.embed_dim as f64).sqrt();
        let emb = Array2::from_shape_simple_fn((config.buckets, config.embed_dim), || {
            let x: f64 = StandardNormal.sample(&mut rng);
            x / s
        });
        let w1 = Array2::from_shape_simple_fn((config.dim, config.embed_dim), || {
            let x: f64 = StandardNormal.sample(&mut rng);
            x * w_std / s
        });
        ToyEncoder {
            config,
            emb,
            w1,
            b1: Array1::zeros(config.dim),
            cache: None,
            grads: None,
            optim: None,
        }
    }

    pub fn config(&self) -> &ToyConfig {
        &self.config
    }

    fn bucket(&self, word: &str) -> u32 {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in word.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        (h % self.config.buckets as u64) as u32
    }

    fn check_tokens(&self, batch: &[Vec<u32>]) -> Result<()> {
        if let Some(t) = batch.iter().flatten().find(|&&t| t as usize >= self.config.buckets) {
            return Err(Error::Backend(format!("token id {t} out of range")));
        }
        Ok(())
    }

    /// Mean of the (rescaled) bucket embeddings, zero for an empty sequence.
    fn pool(&self, batch: &[Vec<u32>]) -> Array2<f64> {
        let s = self.config.param_scale;
        let mut pooled = Array2::zeros((batch.len(), self.config.embed_dim));
        for (mut row, tokens) in pooled.outer_iter_mut().zip(batch) {
            if tokens.is_empty() {
                continue;
            }
            for &t in tokens {
                row += &self.emb.row(t as usize);
            }
            row *= s / tokens.len() as f64;
        }
        pooled
    }

    fn activations(&self, pooled: &Array2<f64>) -> Array2<f64> {
        let s = self.config.param_scale;
        let z = (pooled.dot(&self.w1.t()) + &self.b1) * s;
        z.mapv(f64::tanh)
    }

    fn blob(&self) -> Vec<f64> {
        self.emb
            .iter()
            .chain(self.w1.iter())
            .chain(self.b1.iter())
            .copied()
            .collect()
    }

    fn from_blob(config: ToyConfig, blob: &[f64]) -> Result<Self> {
        let n_emb = config.buckets * config.embed_dim;
        let n_w1 = config.dim * config.embed_dim;
        if blob.len() != n_emb + n_w1 + config.dim {
            return Err(Error::Backend(format!(
                "toy encoder blob has {} values, expected {}",
                blob.len(),
                n_emb + n_w1 + config.dim
            )));
        }
        Ok(ToyEncoder {
            config,
            emb: Array2::from_shape_vec((config.buckets, config.embed_dim), blob[..n_emb].to_vec())
                .expect("length checked"),
            w1: Array2::from_shape_vec(
                (config.dim, config.embed_dim),
                blob[n_emb..n_emb + n_w1].to_vec(),
            )
            .expect("length checked"),
            b1: Array1::from(blob[n_emb + n_w1..].to_vec()),
            cache: None,
            grads: None,
            optim: None,
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let cfg_path = dir.join(CONFIG_FILE);
        let config: ToyConfig = serde_json::from_str(&io::read_to_string(&cfg_path)?)?;
        Self::from_blob(config, &io::read_f64_blob(&dir.join(BLOB_FILE))?)
    }
}

impl Encoder for ToyEncoder {
    fn id(&self) -> &str {
        TOY_ID
    }

    fn dim(&self) -> usize {
        self.config.dim
    }

    fn tokenize(&self, text: &str, max_len: usize) -> Vec<u32> {
        text.split_whitespace()
            .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
            .filter(|w| !w.is_empty())
            .take(max_len)
            .map(|w| self.bucket(&w))
            .collect()
    }

    fn encode(&self, batch: &[Vec<u32>]) -> Result<Array2<f64>> {
        self.check_tokens(batch)?;
        let pooled = self.pool(batch);
        Ok(self.activations(&pooled) * self.config.output_gain)
    }

    fn encode_train(&mut self, batch: &[Vec<u32>], _rng: &mut ChaCha8Rng) -> Result<Array2<f64>> {
        self.check_tokens(batch)?;
        let pooled = self.pool(batch);
        let act = self.activations(&pooled);
        let out = &act * self.config.output_gain;
        self.cache = Some(Cache {
            batch: batch.to_vec(),
            pooled,
            act,
        });
        Ok(out)
    }

    fn backward(&mut self, grad_pooled: ArrayView2<f64>) -> Result<()> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::Backend("backward called without a training forward pass".into()))?;
        if grad_pooled.dim() != cache.act.dim() {
            return Err(Error::Shape(format!(
                "gradient {:?} for activations {:?}",
                grad_pooled.dim(),
                cache.act.dim()
            )));
        }
        let s = self.config.param_scale;
        let cfg = self.config;
        let grads = self.grads.get_or_insert_with(|| Grads {
            emb: Array2::zeros((cfg.buckets, cfg.embed_dim)),
            w1: Array2::zeros((cfg.dim, cfg.embed_dim)),
            b1: Array1::zeros(cfg.dim),
        });
        // d out / d z = gain * (1 - tanh^2)
        let g_z = &grad_pooled * &cache.act.mapv(|a| cfg.output_gain * (1.0 - a * a));
        grads.w1.scaled_add(s, &g_z.t().dot(&cache.pooled));
        grads.b1.scaled_add(s, &g_z.sum_axis(Axis(0)));
        let g_pooled = g_z.dot(&self.w1) * s;
        for (tokens, g_row) in cache.batch.iter().zip(g_pooled.outer_iter()) {
            if tokens.is_empty() {
                continue;
            }
            let w = s / tokens.len() as f64;
            for &t in tokens {
                grads.emb.row_mut(t as usize).scaled_add(w, &g_row);
            }
        }
        Ok(())
    }

    fn step(&mut self, optim: &AdamWConfig) -> Result<()> {
        let cfg = self.config;
        let grads = self.grads.get_or_insert_with(|| Grads {
            emb: Array2::zeros((cfg.buckets, cfg.embed_dim)),
            w1: Array2::zeros((cfg.dim, cfg.embed_dim)),
            b1: Array1::zeros(cfg.dim),
        });
        let state = self.optim.get_or_insert_with(|| Optim {
            emb: AdamWState::new(self.emb.len()),
            w1: AdamWState::new(self.w1.len()),
            b1: AdamWState::new(self.b1.len()),
        });
        state.emb.update(
            optim,
            self.emb.as_slice_mut().expect("standard layout"),
            grads.emb.as_slice().expect("standard layout"),
        );
        state.w1.update(
            optim,
            self.w1.as_slice_mut().expect("standard layout"),
            grads.w1.as_slice().expect("standard layout"),
        );
        state.b1.update(
            optim,
            self.b1.as_slice_mut().expect("standard layout"),
            grads.b1.as_slice().expect("standard layout"),
        );
        grads.emb.fill(0.0);
        grads.w1.fill(0.0);
        grads.b1.fill(0.0);
        Ok(())
    }

    fn save(&self, dir: &Path) -> Result<()> {
        let cfg = serde_json::to_string_pretty(&self.config)?;
        io::write_atomic(&dir.join(CONFIG_FILE), cfg.as_bytes())?;
        io::write_f64_blob(&dir.join(BLOB_FILE), &self.blob())
    }

    fn snapshot(&self) -> Result<Box<dyn Encoder>> {
        Ok(Box::new(ToyEncoder {
            config: self.config,
            emb: self.emb.clone(),
            w1: self.w1.clone(),
            b1: self.b1.clone(),
            cache: None,
            grads: None,
            optim: None,
        }))
    }
}

/// Serves the `toy` identifier.
pub struct ToyFactory;

impl EncoderFactory for ToyFactory {
    fn create(&self, id: &str, seed: u64) -> Result<Option<Box<dyn Encoder>>> {
        Ok((id == TOY_ID).then(|| Box::new(ToyEncoder::new(ToyConfig::default(), seed)) as Box<dyn Encoder>))
    }

    fn load(&self, id: &str, dir: &Path) -> Result<Option<Box<dyn Encoder>>> {
        if id != TOY_ID {
            return Ok(None);
        }
        Ok(Some(Box::new(ToyEncoder::load(dir)?)))
    }
}
