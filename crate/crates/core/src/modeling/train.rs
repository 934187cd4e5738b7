use std::fs;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoder::{Encoder, Registry};
use super::head::{ClassificationHead, HeadOptimizer};
use super::loss::masked_bce_with_logits;
use super::optim::AdamWConfig;
use super::scores::ScoreMatrix;
use crate::corpus::{normalize_text, Dataset, Labels};
use crate::ensemble::binarize;
use crate::error::{Error, Result};
use crate::evaluation::full_report;
use crate::io;

/// Fine-tuning hyperparameters. The defaults are the published settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub seed: u64,
    pub max_seq_len: usize,
    /// Apply URL removal to training text as well (prediction always applies it).
    pub normalize_training_text: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 3e-5,
            weight_decay: 0.01,
            epochs: 15,
            batch_size: 16,
            dropout: 0.5,
            seed: 0,
            max_seq_len: 128,
            normalize_training_text: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.max_seq_len == 0 {
            return bad("max_seq_len must be at least 1");
        }
        Ok(())
    }

    pub fn optimizer(&self) -> AdamWConfig {
        AdamWConfig::new(self.learning_rate, self.weight_decay)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_mean_f1: f64,
}

/// Everything recorded next to the parameters of a selected model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub backend: String,
    pub config: TrainConfig,
    /// Dev mean F1 of the selected epoch, in [0, 1].
    pub metric: f64,
    /// 1-based epoch the parameters come from.
    pub epoch: usize,
    pub seed: u64,
    pub dim: usize,
    pub history: Vec<EpochRecord>,
}

/// A fine-tuned encoder plus head, selected by dev mean F1.
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub head: ClassificationHead,
    pub encoder: Box<dyn Encoder>,
}

const META_FILE: &str = "meta.json";
const HEAD_FILE: &str = "head.bin";

impl Checkpoint {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.encoder.save(dir)?;
        io::write_f64_blob(&dir.join(HEAD_FILE), &self.head.to_flat())?;
        let meta = serde_json::to_string_pretty(&self.meta)?;
        io::write_atomic(&dir.join(META_FILE), meta.as_bytes())
    }

    pub fn load(dir: &Path, registry: &Registry) -> Result<Self> {
        let meta: CheckpointMeta =
            serde_json::from_str(&io::read_to_string(&dir.join(META_FILE))?)?;
        let encoder = registry.load(&meta.backend, dir)?;
        if encoder.dim() != meta.dim {
            return Err(Error::Backend(format!(
                "encoder width {} does not match recorded width {}",
                encoder.dim(),
                meta.dim
            )));
        }
        let head = ClassificationHead::from_flat(
            meta.dim,
            meta.config.dropout,
            &io::read_f64_blob(&dir.join(HEAD_FILE))?,
        )?;
        Ok(Checkpoint {
            meta,
            head,
            encoder,
        })
    }

    /// Evaluation-mode scores on URL-normalized text, in dataset order.
    pub fn predict(&self, dataset: &Dataset) -> Result<ScoreMatrix> {
        let texts: Vec<String> = dataset.records().iter().map(|r| normalize_text(&r.text)).collect();
        let values = forward_scores(
            self.encoder.as_ref(),
            &self.head,
            &texts,
            self.meta.config.max_seq_len,
            self.meta.config.batch_size.max(32),
        )?;
        ScoreMatrix::new(dataset.ids(), values)
    }
}

/// Evaluation-mode sigmoid scores for `texts`, shape `(texts.len(), 7)`.
///
/// Sequences longer than `max_len` tokens are truncated; an empty
/// tokenization is still scored.
pub fn forward_scores<S: AsRef<str>>(
    encoder: &dyn Encoder,
    head: &ClassificationHead,
    texts: &[S],
    max_len: usize,
    batch_size: usize,
) -> Result<Array2<f64>> {
    if texts.is_empty() {
        return Err(Error::Invalid("nothing to score".into()));
    }
    let tokens: Vec<Vec<u32>> = texts
        .iter()
        .map(|t| encoder.tokenize(t.as_ref(), max_len))
        .collect();
    let mut parts = Vec::new();
    for chunk in tokens.chunks(batch_size.max(1)) {
        let pooled = encoder.encode(chunk)?;
        parts.push(head.scores(pooled.view())?);
    }
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    ndarray::concatenate(Axis(0), &views).map_err(|e| Error::Shape(e.to_string()))
}

fn dev_mean_f1(encoder: &dyn Encoder, head: &ClassificationHead, dev: &Dataset, cfg: &TrainConfig) -> Result<f64> {
    let texts: Vec<String> = dev.records().iter().map(|r| normalize_text(&r.text)).collect();
    let scores = forward_scores(encoder, head, &texts, cfg.max_seq_len, cfg.batch_size.max(32))?;
    let labels = binarize(&ScoreMatrix::new(dev.ids(), scores)?, 0.5);
    let report = full_report(&labels, dev)?;
    report
        .mean_f1
        .ok_or_else(|| Error::Invalid("dev set has no labelled question".into()))
}

/// Fine-tunes `encoder` jointly with a fresh head and returns the epoch whose
/// dev mean F1 is highest (earliest epoch on ties).
pub fn train(
    mut encoder: Box<dyn Encoder>,
    config: &TrainConfig,
    train: &Dataset,
    dev: &Dataset,
) -> Result<Checkpoint> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Invalid("training set is empty".into()));
    }
    if !dev.has_gold() {
        return Err(Error::Invalid(
            "dev set has no yes/no gold label, so checkpoints cannot be selected".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut head = ClassificationHead::new(encoder.dim(), config.dropout, &mut rng);
    let mut head_optim = HeadOptimizer::new(&head);
    let optim = config.optimizer();

    let tokens: Vec<Vec<u32>> = train
        .records()
        .iter()
        .map(|r| {
            if config.normalize_training_text {
                encoder.tokenize(&normalize_text(&r.text), config.max_seq_len)
            } else {
                encoder.tokenize(&r.text, config.max_seq_len)
            }
        })
        .collect();
    let gold: Vec<Labels> = train.gold();

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, usize, ClassificationHead, Box<dyn Encoder>)> = None;
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Vec<u32>> = chunk.iter().map(|&i| tokens[i].clone()).collect();
            let batch_gold: Vec<Labels> = chunk.iter().map(|&i| gold[i]).collect();
            let pooled = encoder.encode_train(&batch, &mut rng)?;
            let (logits, cache) = head.forward_train(pooled.view(), &mut rng)?;
            let (loss, grad_logits) = masked_bce_with_logits(logits.view(), &batch_gold)?;
            let grads = head.backward(&cache, grad_logits.view());
            encoder.backward(grads.input.view())?;
            head_optim.step(&optim, &mut head, &grads);
            encoder.step(&optim)?;
            loss_sum += loss;
            batches += 1;
        }
        let metric = dev_mean_f1(encoder.as_ref(), &head, dev, config)?;
        let train_loss = loss_sum / batches as f64;
        log::info!(
            "{} epoch {epoch}/{}: train loss {train_loss:.4}, dev mean F1 {:.4}",
            encoder.id(),
            config.epochs,
            metric
        );
        history.push(EpochRecord {
            epoch,
            train_loss,
            dev_mean_f1: metric,
        });
        if best.as_ref().is_none_or(|(m, ..)| metric > *m) {
            best = Some((metric, epoch, head.clone(), encoder.snapshot()?));
        }
    }

    let (metric, epoch, head, encoder) = best.expect("at least one epoch");
    Ok(Checkpoint {
        meta: CheckpointMeta {
            backend: encoder.id().to_string(),
            config: config.clone(),
            metric,
            epoch,
            seed: config.seed,
            dim: encoder.dim(),
            history,
        },
        head,
        encoder,
    })
}
