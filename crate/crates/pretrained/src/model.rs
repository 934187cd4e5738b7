//! BERT / RoBERTa encoder stack on candle tensors, returning the final
//! hidden state of the classification token.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use candle_core::{DType, Device, Tensor, Var, D};
use infodemic::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;

pub const SAFETENSORS_FILE: &str = "model.safetensors";
pub const PYTORCH_FILE: &str = "pytorch_model.bin";

pub(crate) fn backend<T>(r: candle_core::Result<T>) -> Result<T> {
    r.map_err(|e| Error::Backend(e.to_string()))
}

/// Parameter names in the layout of `transformers`' `BertModel`.
pub fn parameter_names(cfg: &ModelConfig) -> Vec<String> {
    let mut names: Vec<String> = [
        "embeddings.word_embeddings.weight",
        "embeddings.position_embeddings.weight",
        "embeddings.token_type_embeddings.weight",
        "embeddings.LayerNorm.weight",
        "embeddings.LayerNorm.bias",
    ]
    .map(String::from)
    .to_vec();
    for i in 0..cfg.num_hidden_layers {
        for part in [
            "attention.self.query",
            "attention.self.key",
            "attention.self.value",
            "attention.output.dense",
            "attention.output.LayerNorm",
            "intermediate.dense",
            "output.dense",
            "output.LayerNorm",
        ] {
            for leaf in ["weight", "bias"] {
                names.push(format!("encoder.layer.{i}.{part}.{leaf}"));
            }
        }
    }
    names
}

fn canonical_name(name: &str) -> String {
    let stripped = ["bert.", "roberta.", "model."]
        .iter()
        .find_map(|p| name.strip_prefix(p))
        .unwrap_or(name);
    stripped.replace("LayerNorm.gamma", "LayerNorm.weight").replace("LayerNorm.beta", "LayerNorm.bias")
}

fn expected_shape(cfg: &ModelConfig, name: &str) -> Vec<usize> {
    let (d, ff) = (cfg.hidden_size, cfg.intermediate_size);
    let leaf_bias = name.ends_with(".bias");
    if name.contains("LayerNorm") {
        return vec![d];
    }
    match name {
        "embeddings.word_embeddings.weight" => vec![cfg.vocab_size, d],
        "embeddings.position_embeddings.weight" => vec![cfg.max_position_embeddings, d],
        "embeddings.token_type_embeddings.weight" => vec![cfg.type_vocab_size, d],
        n if n.contains("intermediate.dense") => {
            if leaf_bias {
                vec![ff]
            } else {
                vec![ff, d]
            }
        }
        n if n.ends_with("output.dense.weight") && !n.contains("attention") => vec![d, ff],
        _ if leaf_bias => vec![d],
        _ => vec![d, d],
    }
}

/// Reads `model.safetensors` or, failing that, `pytorch_model.bin`.
pub fn read_weights(dir: &Path) -> Result<HashMap<String, Tensor>> {
    let st = dir.join(SAFETENSORS_FILE);
    let pt = dir.join(PYTORCH_FILE);
    let raw: Vec<(String, Tensor)> = if st.exists() {
        backend(candle_core::safetensors::load(&st, &Device::Cpu))?.into_iter().collect()
    } else if pt.exists() {
        backend(candle_core::pickle::read_all(&pt))?
    } else {
        return Err(Error::Backend(format!(
            "{}: neither {SAFETENSORS_FILE} nor {PYTORCH_FILE} found",
            dir.display()
        )));
    };
    Ok(raw.into_iter().map(|(n, t)| (canonical_name(&n), t)).collect())
}

pub struct Transformer {
    pub config: ModelConfig,
    params: BTreeMap<String, Var>,
}

impl Transformer {
    /// Builds the encoder from named tensors; unrelated entries (poolers,
    /// task heads) are ignored and missing or misshapen ones are errors.
    pub fn from_tensors(config: ModelConfig, mut tensors: HashMap<String, Tensor>) -> Result<Self> {
        config.check()?;
        let mut params = BTreeMap::new();
        for name in parameter_names(&config) {
            let t = tensors
                .remove(&name)
                .ok_or_else(|| Error::Backend(format!("checkpoint lacks parameter {name}")))?;
            let want = expected_shape(&config, &name);
            if t.dims() != want.as_slice() {
                return Err(Error::Backend(format!(
                    "parameter {name} has shape {:?}, expected {want:?}",
                    t.dims()
                )));
            }
            let t = backend(t.to_dtype(DType::F32).and_then(|t| t.copy()))?;
            params.insert(name, backend(Var::from_tensor(&t))?);
        }
        Ok(Transformer { config, params })
    }

    pub fn load(config: ModelConfig, dir: &Path) -> Result<Self> {
        Self::from_tensors(config, read_weights(dir)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tensors: HashMap<&str, Tensor> =
            self.params.iter().map(|(n, v)| (n.as_str(), v.as_tensor().clone())).collect();
        let tmp = path.with_extension("safetensors.tmp");
        backend(candle_core::safetensors::save(&tensors, &tmp))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::Backend(format!("{}: {e}", path.display())))
    }

    /// Independent copy of every parameter.
    pub fn deep_copy(&self) -> Result<Self> {
        let mut params = BTreeMap::new();
        for (n, v) in &self.params {
            params.insert(n.clone(), backend(v.as_tensor().copy().and_then(|t| Var::from_tensor(&t)))?);
        }
        Ok(Transformer {
            config: self.config.clone(),
            params,
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, &Var)> {
        self.params.iter().map(|(n, v)| (n.as_str(), v))
    }

    fn p(&self, name: &str) -> &Tensor {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("parameter {name} missing after load"))
            .as_tensor()
    }

    /// Hidden state of the first token for each sequence, shape `(batch, d)`.
    /// Sequences are right-padded; dropout is applied only when `rng` is given.
    pub fn forward(&self, batch: &[Vec<u32>], pad_id: u32, rng: Option<&mut ChaCha8Rng>) -> Result<Tensor> {
        backend(self.forward_inner(batch, pad_id, rng))
    }

    fn forward_inner(
        &self,
        batch: &[Vec<u32>],
        pad_id: u32,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> candle_core::Result<Tensor> {
        let cfg = &self.config;
        let dev = Device::Cpu;
        let b = batch.len();
        let l = batch.iter().map(Vec::len).max().unwrap_or(0).max(1);
        if l > cfg.max_tokens() {
            candle_core::bail!("sequence of {l} tokens exceeds the model limit of {}", cfg.max_tokens());
        }
        let mut ids = Vec::with_capacity(b * l);
        let mut positions = Vec::with_capacity(b * l);
        let mut mask = Vec::with_capacity(b * l);
        let offset = if cfg.roberta_positions() { cfg.pad_id() + 1 } else { 0 };
        for seq in batch {
            for j in 0..l {
                let real = j < seq.len();
                ids.push(if real { seq[j] } else { pad_id });
                mask.push(if real { 0.0f32 } else { f32::MIN });
                positions.push(match (real, cfg.roberta_positions()) {
                    (_, false) => j as u32,
                    (true, true) => offset + j as u32,
                    (false, true) => cfg.pad_id(),
                });
            }
        }
        if let Some(&bad) = ids.iter().find(|&&i| i as usize >= cfg.vocab_size) {
            candle_core::bail!("token id {bad} outside vocabulary of {}", cfg.vocab_size);
        }
        let ids = Tensor::from_vec(ids, b * l, &dev)?;
        let positions = Tensor::from_vec(positions, b * l, &dev)?;
        let mask = Tensor::from_vec(mask, (b, 1, 1, l), &dev)?;
        let d = cfg.hidden_size;

        let words = self.p("embeddings.word_embeddings.weight").embedding(&ids)?;
        let pos = self.p("embeddings.position_embeddings.weight").embedding(&positions)?;
        let types = self.p("embeddings.token_type_embeddings.weight").narrow(0, 0, 1)?;
        let emb = (words + pos)?.broadcast_add(&types)?.reshape((b, l, d))?;
        let mut h = self.layer_norm(&emb, "embeddings.LayerNorm")?;
        h = dropout(&h, cfg.hidden_dropout_prob, &mut rng)?;

        let heads = cfg.num_attention_heads;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        for i in 0..cfg.num_hidden_layers {
            let pre = format!("encoder.layer.{i}");
            let split = |t: Tensor| t.reshape((b, l, heads, dh))?.transpose(1, 2)?.contiguous();
            let q = split(self.linear(&h, &format!("{pre}.attention.self.query"))?)?;
            let k = split(self.linear(&h, &format!("{pre}.attention.self.key"))?)?;
            let v = split(self.linear(&h, &format!("{pre}.attention.self.value"))?)?;
            let scores = q.matmul(&k.t()?.contiguous()?)?.affine(scale, 0.0)?.broadcast_add(&mask)?;
            let probs = dropout(&softmax_last(&scores)?, cfg.attention_probs_dropout_prob, &mut rng)?;
            let ctx = probs.matmul(&v)?.transpose(1, 2)?.reshape((b, l, d))?;
            let attn = self.linear(&ctx, &format!("{pre}.attention.output.dense"))?;
            let attn = dropout(&attn, cfg.hidden_dropout_prob, &mut rng)?;
            let x = self.layer_norm(&(attn + &h)?, &format!("{pre}.attention.output.LayerNorm"))?;

            let inter = self.linear(&x, &format!("{pre}.intermediate.dense"))?;
            let inter = match cfg.hidden_act.as_str() {
                "gelu" => inter.gelu_erf()?,
                "relu" => inter.relu()?,
                _ => inter.gelu()?,
            };
            let out = self.linear(&inter, &format!("{pre}.output.dense"))?;
            let out = dropout(&out, cfg.hidden_dropout_prob, &mut rng)?;
            h = self.layer_norm(&(out + x)?, &format!("{pre}.output.LayerNorm"))?;
        }
        h.narrow(1, 0, 1)?.squeeze(1)
    }

    fn linear(&self, x: &Tensor, name: &str) -> candle_core::Result<Tensor> {
        let w = self.p(&format!("{name}.weight"));
        let bias = self.p(&format!("{name}.bias"));
        let (b, l, d_in) = x.dims3()?;
        let y = x.reshape((b * l, d_in))?.matmul(&w.t()?)?.broadcast_add(bias)?;
        y.reshape((b, l, w.dim(0)?))
    }

    fn layer_norm(&self, x: &Tensor, name: &str) -> candle_core::Result<Tensor> {
        let mean = x.mean_keepdim(D::Minus1)?;
        let centered = x.broadcast_sub(&mean)?;
        let var = centered.sqr()?.mean_keepdim(D::Minus1)?;
        let normed = centered.broadcast_div(&var.affine(1.0, self.config.layer_norm_eps)?.sqrt()?)?;
        normed
            .broadcast_mul(self.p(&format!("{name}.weight")))?
            .broadcast_add(self.p(&format!("{name}.bias")))
    }
}

fn softmax_last(x: &Tensor) -> candle_core::Result<Tensor> {
    let max = x.max_keepdim(D::Minus1)?.detach();
    let e = x.broadcast_sub(&max)?.exp()?;
    e.broadcast_div(&e.sum_keepdim(D::Minus1)?)
}

/// Inverted dropout with the mask drawn from `rng`.
fn dropout(x: &Tensor, p: f64, rng: &mut Option<&mut ChaCha8Rng>) -> candle_core::Result<Tensor> {
    let Some(rng) = rng.as_deref_mut() else {
        return Ok(x.clone());
    };
    if p <= 0.0 {
        return Ok(x.clone());
    }
    let keep = (1.0 / (1.0 - p)) as f32;
    let mask: Vec<f32> = (0..x.elem_count())
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    x.mul(&Tensor::from_vec(mask, x.shape(), x.device())?)
}
