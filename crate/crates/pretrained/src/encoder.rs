use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use candle_core::{Device, Tensor};
use infodemic::modeling::{AdamWConfig, Encoder, EncoderFactory};
use infodemic::{Error, Result};
use ndarray::{Array2, ArrayView2};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::hub::Hub;
use crate::model::{backend, Transformer, SAFETENSORS_FILE};
use crate::optim::AdamW;
use crate::tokenizer::TextTokenizer;

/// Sub-directory of a checkpoint that holds a fine-tuned pretrained encoder.
pub const ENCODER_DIR: &str = "encoder";
const MARKER_FILE: &str = "pretrained.json";

#[derive(Serialize, Deserialize)]
struct Marker {
    backend: String,
}

/// A BERT or RoBERTa encoder whose pooled output is the classification
/// token's final hidden state.
pub struct PretrainedEncoder {
    id: String,
    model: Transformer,
    tokenizer: Arc<TextTokenizer>,
    pending: Option<Tensor>,
    grads: HashMap<String, Tensor>,
    optim: AdamW,
}

/// Checkpoints whose names say "cased" (but not "uncased") keep letter case
/// when the tokenizer files do not say otherwise.
fn lowercase_hint(id: &str) -> bool {
    let id = id.to_lowercase();
    id.contains("uncased") || !id.contains("cased")
}

impl PretrainedEncoder {
    /// Loads `config.json`, weights and tokenizer files from `dir`.
    pub fn from_dir(id: &str, dir: &Path) -> Result<Self> {
        let config = ModelConfig::load(&dir.join("config.json"))?;
        let tokenizer = TextTokenizer::from_dir(dir, lowercase_hint(id))?;
        if tokenizer.vocab_size() > config.vocab_size {
            log::warn!(
                "{id}: tokenizer knows {} tokens but the embedding table has {} rows",
                tokenizer.vocab_size(),
                config.vocab_size
            );
        }
        let model = Transformer::load(config, dir)?;
        Ok(PretrainedEncoder {
            id: id.to_string(),
            model,
            tokenizer: Arc::new(tokenizer),
            pending: None,
            grads: HashMap::new(),
            optim: AdamW::new(),
        })
    }

    pub fn model(&self) -> &Transformer {
        &self.model
    }

    /// Gradients accumulated since the last optimizer step, by parameter name.
    pub fn gradients(&self) -> &HashMap<String, Tensor> {
        &self.grads
    }

    fn to_array(t: &Tensor) -> Result<Array2<f64>> {
        let (b, d) = backend(t.dims2())?;
        let flat = backend(t.flatten_all().and_then(|t| t.to_vec1::<f32>()))?;
        Array2::from_shape_vec((b, d), flat.into_iter().map(f64::from).collect())
            .map_err(|e| Error::Shape(e.to_string()))
    }
}

impl Encoder for PretrainedEncoder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.model.config.hidden_size
    }

    fn tokenize(&self, text: &str, max_len: usize) -> Vec<u32> {
        self.tokenizer.encode(text, max_len.min(self.model.config.max_tokens()))
    }

    fn encode(&self, batch: &[Vec<u32>]) -> Result<Array2<f64>> {
        let pooled = self.model.forward(batch, self.tokenizer.pad_id, None)?;
        Self::to_array(&pooled.detach())
    }

    fn encode_train(&mut self, batch: &[Vec<u32>], rng: &mut ChaCha8Rng) -> Result<Array2<f64>> {
        let pooled = self.model.forward(batch, self.tokenizer.pad_id, Some(rng))?;
        let out = Self::to_array(&pooled)?;
        self.pending = Some(pooled);
        Ok(out)
    }

    fn backward(&mut self, grad_pooled: ArrayView2<f64>) -> Result<()> {
        let pooled = self
            .pending
            .take()
            .ok_or_else(|| Error::Backend("backward called without a preceding encode_train".into()))?;
        let g: Vec<f32> = grad_pooled.iter().map(|&x| x as f32).collect();
        let g = backend(Tensor::from_vec(g, grad_pooled.dim(), &Device::Cpu))?;
        let surrogate = backend(pooled.mul(&g).and_then(|t| t.sum_all()))?;
        let store = backend(surrogate.backward())?;
        for (name, var) in self.model.vars() {
            let Some(grad) = store.get(var.as_tensor()) else { continue };
            let total = match self.grads.remove(name) {
                Some(prev) => backend(prev + grad)?,
                None => grad.clone(),
            };
            self.grads.insert(name.to_string(), total);
        }
        Ok(())
    }

    fn step(&mut self, optim: &AdamWConfig) -> Result<()> {
        backend(self.optim.step(optim, self.model.vars(), &self.grads))?;
        self.grads.clear();
        Ok(())
    }

    fn save(&self, dir: &Path) -> Result<()> {
        let out = dir.join(ENCODER_DIR);
        fs::create_dir_all(&out).map_err(|e| Error::Backend(format!("{}: {e}", out.display())))?;
        let config = serde_json::to_string_pretty(&self.model.config)?;
        infodemic::io::write_atomic(&out.join("config.json"), config.as_bytes())?;
        self.model.save(&out.join(SAFETENSORS_FILE))?;
        self.tokenizer.save(&out)?;
        let marker = serde_json::to_string_pretty(&Marker {
            backend: self.id.clone(),
        })?;
        infodemic::io::write_atomic(&out.join(MARKER_FILE), marker.as_bytes())
    }

    fn snapshot(&self) -> Result<Box<dyn Encoder>> {
        Ok(Box::new(PretrainedEncoder {
            id: self.id.clone(),
            model: self.model.deep_copy()?,
            tokenizer: Arc::clone(&self.tokenizer),
            pending: None,
            grads: HashMap::new(),
            optim: AdamW::new(),
        }))
    }
}

/// Serves `owner/name` hub ids and local checkpoint directories.
pub struct PretrainedFactory {
    hub: Hub,
}

impl PretrainedFactory {
    pub fn new(hub: Hub) -> Self {
        PretrainedFactory { hub }
    }
}

impl EncoderFactory for PretrainedFactory {
    fn create(&self, id: &str, _seed: u64) -> Result<Option<Box<dyn Encoder>>> {
        if !Hub::recognises(id) {
            return Ok(None);
        }
        let dir = self.hub.resolve(id)?;
        Ok(Some(Box::new(PretrainedEncoder::from_dir(id, &dir)?)))
    }

    fn load(&self, id: &str, dir: &Path) -> Result<Option<Box<dyn Encoder>>> {
        let enc = dir.join(ENCODER_DIR);
        let marker = enc.join(MARKER_FILE);
        if !marker.is_file() {
            return Ok(None);
        }
        let m: Marker = serde_json::from_str(&infodemic::io::read_to_string(&marker)?)?;
        if m.backend != id {
            return Err(Error::Backend(format!(
                "{} holds encoder {:?}, expected {id:?}",
                enc.display(),
                m.backend
            )));
        }
        Ok(Some(Box::new(PretrainedEncoder::from_dir(id, &enc)?)))
    }
}
