//! Pretrained BERT-family encoders (BERT, RoBERTa, BERTweet) for the
//! fine-tuning pipeline, loaded from Hugging Face checkpoint directories.
//!
//! Backend ids are either `owner/name` hub repositories, fetched into the
//! cache directory on first use, or paths to local checkpoint directories.

pub mod config;
mod encoder;
mod fastbpe;
pub mod hub;
pub mod model;
mod optim;
pub mod tokenizer;

pub use config::ModelConfig;
pub use encoder::{PretrainedEncoder, PretrainedFactory, ENCODER_DIR};
pub use fastbpe::normalize_tweet;
pub use hub::Hub;
pub use tokenizer::TextTokenizer;

use infodemic::modeling::Registry;

/// The toy backend plus pretrained encoders resolved through [`Hub::from_env`].
pub fn registry() -> Registry {
    let mut r = Registry::default();
    r.register(Box::new(PretrainedFactory::new(Hub::from_env())));
    r
}
