use std::path::Path;

use infodemic::{Error, Result};
use serde::{Deserialize, Serialize};

/// The subset of a Hugging Face `config.json` needed to rebuild a BERT or
/// RoBERTa encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default = "default_model_type")]
    pub model_type: String,
    pub vocab_size: usize,
    pub hidden_size: usize,
    pub num_hidden_layers: usize,
    pub num_attention_heads: usize,
    pub intermediate_size: usize,
    #[serde(default = "default_act")]
    pub hidden_act: String,
    #[serde(default = "default_dropout")]
    pub hidden_dropout_prob: f64,
    #[serde(default = "default_dropout")]
    pub attention_probs_dropout_prob: f64,
    pub max_position_embeddings: usize,
    #[serde(default = "default_type_vocab")]
    pub type_vocab_size: usize,
    #[serde(default = "default_eps")]
    pub layer_norm_eps: f64,
    #[serde(default)]
    pub pad_token_id: Option<u32>,
}

fn default_model_type() -> String {
    "bert".into()
}
fn default_act() -> String {
    "gelu".into()
}
fn default_dropout() -> f64 {
    0.1
}
fn default_type_vocab() -> usize {
    2
}
fn default_eps() -> f64 {
    1e-12
}

impl ModelConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = infodemic::io::read_to_string(path)?;
        let cfg: ModelConfig =
            serde_json::from_str(&text).map_err(|e| Error::Backend(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.num_attention_heads == 0 || self.hidden_size % self.num_attention_heads != 0 {
            return Err(Error::Backend(format!(
                "hidden size {} is not divisible into {} attention heads",
                self.hidden_size, self.num_attention_heads
            )));
        }
        if !matches!(self.hidden_act.as_str(), "gelu" | "gelu_new" | "gelu_pytorch_tanh" | "relu") {
            return Err(Error::Backend(format!("unsupported activation {:?}", self.hidden_act)));
        }
        Ok(())
    }

    /// RoBERTa-style models offset positions past the padding index.
    pub fn roberta_positions(&self) -> bool {
        matches!(self.model_type.as_str(), "roberta" | "bertweet" | "xlm-roberta" | "camembert")
    }

    pub fn pad_id(&self) -> u32 {
        self.pad_token_id.unwrap_or(if self.roberta_positions() { 1 } else { 0 })
    }

    /// Longest input (special tokens included) the position table covers.
    pub fn max_tokens(&self) -> usize {
        if self.roberta_positions() {
            self.max_position_embeddings.saturating_sub(self.pad_id() as usize + 1)
        } else {
            self.max_position_embeddings
        }
    }
}
