//! Fine-tuning, ensembling and evaluation pipeline for seven-question
//! misinformation labelling of tweets.
//!
//! The crate is organised the way the pipeline runs:
//!
//! * [`corpus`] loads and normalizes tab-separated tweet datasets.
//! * [`analysis`] tabulates label distributions and pairwise φ coefficients.
//! * [`modeling`] wraps a text encoder with a seven-way sigmoid head and
//!   fine-tunes it with a nan-masked binary cross-entropy objective.
//! * [`ensemble`] rounds per-model scores and aggregates them by majority vote.
//! * [`evaluation`] scores hard labels with nan-aware weighted precision,
//!   recall and F1, and provides the majority, n-gram and random baselines.

pub mod analysis;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod modeling;
pub mod synthetic;

pub use corpus::{Dataset, LabelValue, LabeledTweet, Split};
pub use ensemble::{binarize, majority_vote, LabelMatrix, ScoreTensor, TieRule, VoteConfig};
pub use error::{Error, Result};
pub use evaluation::{full_report, question_prf, MetricsReport, QuestionMetrics};
pub use modeling::{Checkpoint, ScoreMatrix, TrainConfig};

/// Number of annotation questions (Q1..Q7).
pub const NUM_QUESTIONS: usize = 7;
