//! Nan-aware weighted precision/recall/F1 and the reference baselines.

pub mod baselines;
mod metrics;

pub use baselines::{majority_baseline, ngram_baseline, random_baseline, NgramConfig};
pub use metrics::{full_report, question_prf, weighted_prf, MetricsReport, Prf, QuestionMetrics};
