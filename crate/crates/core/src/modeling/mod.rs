//! Seven-output classification head, nan-masked objective and fine-tuning.

pub mod encoder;
pub mod head;
pub mod loss;
pub mod optim;
pub mod scores;
pub mod toy;
mod train;

pub use encoder::{Encoder, EncoderFactory, Registry};
pub use head::{ClassificationHead, HeadCache, HeadGrads, HeadOptimizer};
pub use loss::{masked_bce, masked_bce_with_logits, sigmoid};
pub use optim::{AdamWConfig, AdamWState};
pub use scores::ScoreMatrix;
pub use toy::{ToyConfig, ToyEncoder, TOY_ID};
pub use train::{forward_scores, train, Checkpoint, CheckpointMeta, EpochRecord, TrainConfig};
