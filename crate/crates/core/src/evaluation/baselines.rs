//! Reference systems: per-question majority class, an n-gram linear model and
//! a seeded coin flip.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, Dataset};
use crate::ensemble::LabelMatrix;
use crate::error::{Error, Result};
use crate::NUM_QUESTIONS;

/// Predicts each question's most frequent training answer (ties go to Yes).
pub fn majority_baseline(train: &Dataset, test: &Dataset) -> Result<LabelMatrix> {
    let mut column = [false; NUM_QUESTIONS];
    for (q, slot) in column.iter_mut().enumerate() {
        let (mut yes, mut no) = (0usize, 0usize);
        for r in train.records() {
            match r.labels[q].as_binary() {
                Some(1) => yes += 1,
                Some(_) => no += 1,
                None => {}
            }
        }
        if yes + no == 0 {
            return Err(Error::Invalid(format!(
                "question {} has no yes/no label in the training data",
                q + 1
            )));
        }
        *slot = yes >= no;
    }
    Ok(LabelMatrix::constant(test.ids(), column))
}

/// Independent fair coin per cell.
pub fn random_baseline(test: &Dataset, seed: u64) -> LabelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..test.len())
        .map(|_| std::array::from_fn(|_| rng.random::<bool>()))
        .collect();
    LabelMatrix::new(test.ids(), rows).expect("one row per record")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgramConfig {
    pub min_n: usize,
    pub max_n: usize,
    /// n-grams seen fewer times than this in training text are dropped.
    pub min_freq: usize,
    /// Coefficient of the `λ/2 ||w||²` penalty added to the mean log-loss.
    pub l2: f64,
    pub iterations: usize,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            min_n: 1,
            max_n: 2,
            min_freq: 1,
            l2: 1e-4,
            iterations: 2000,
        }
    }
}

fn words(text: &str) -> Vec<String> {
    normalize_text(text)
        .split(' ')
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn ngrams(text: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let w = words(text);
    let mut out = Vec::new();
    for n in min_n..=max_n {
        if n == 0 || n > w.len() {
            continue;
        }
        out.extend(w.windows(n).map(|g| g.join(" ")));
    }
    out
}

/// Sparse count vectors over a vocabulary fixed from training text.
struct Vectorizer {
    vocab: HashMap<String, usize>,
    min_n: usize,
    max_n: usize,
}

impl Vectorizer {
    fn fit(texts: &[&str], cfg: &NgramConfig) -> Result<Self> {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for t in texts {
            for g in ngrams(t, cfg.min_n, cfg.max_n) {
                *counts.entry(g).or_default() += 1;
            }
        }
        let mut kept: Vec<String> = counts
            .into_iter()
            .filter(|(_, c)| *c >= cfg.min_freq)
            .map(|(g, _)| g)
            .collect();
        if kept.is_empty() {
            return Err(Error::Invalid("n-gram vocabulary is empty".into()));
        }
        kept.sort();
        Ok(Vectorizer {
            vocab: kept.into_iter().enumerate().map(|(i, g)| (g, i)).collect(),
            min_n: cfg.min_n,
            max_n: cfg.max_n,
        })
    }

    fn transform(&self, text: &str) -> Vec<(usize, f64)> {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for g in ngrams(text, self.min_n, self.max_n) {
            if let Some(&i) = self.vocab.get(&g) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut v: Vec<_> = counts.into_iter().collect();
        v.sort_by_key(|&(i, _)| i);
        v
    }
}

/// L2-regularized logistic regression fit by full-batch gradient descent
/// from zero, with step `1/L` for the smoothness bound
/// `L = max_i ||x_i||² / 4 + λ` (bias feature included).
struct Logistic {
    w: Vec<f64>,
    b: f64,
}

impl Logistic {
    fn fit(x: &[Vec<(usize, f64)>], y: &[bool], dim: usize, cfg: &NgramConfig) -> Self {
        let n = x.len() as f64;
        let max_sq = x
            .iter()
            .map(|xi| 1.0 + xi.iter().map(|&(_, c)| c * c).sum::<f64>())
            .fold(0.0, f64::max);
        let step = 1.0 / (max_sq / 4.0 + cfg.l2);
        let mut w = vec![0.0; dim + 1];
        let mut grad = vec![0.0; dim + 1];
        for _ in 0..cfg.iterations {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (xi, &yi) in x.iter().zip(y) {
                let z = w[dim] + xi.iter().map(|&(j, c)| w[j] * c).sum::<f64>();
                let r = (crate::modeling::sigmoid(z) - f64::from(u8::from(yi))) / n;
                for &(j, c) in xi {
                    grad[j] += r * c;
                }
                grad[dim] += r;
            }
            for j in 0..dim {
                grad[j] += cfg.l2 * w[j];
            }
            for (wj, gj) in w.iter_mut().zip(&grad) {
                *wj -= step * gj;
            }
        }
        let b = w.pop().expect("bias slot");
        Logistic { w, b }
    }

    fn predict(&self, x: &[(usize, f64)]) -> bool {
        self.b + x.iter().map(|&(j, c)| self.w[j] * c).sum::<f64>() >= 0.0
    }
}

/// Per-question logistic regression on uni+bigram counts of normalized text.
///
/// Each question is fit on the training records whose label is not Nan; a
/// question observed with a single class predicts that class everywhere.
pub fn ngram_baseline(train: &Dataset, test: &Dataset, cfg: &NgramConfig) -> Result<LabelMatrix> {
    if cfg.min_n == 0 || cfg.max_n < cfg.min_n {
        return Err(Error::Invalid(format!(
            "invalid n-gram range {}..={}",
            cfg.min_n, cfg.max_n
        )));
    }
    let vectorizer = Vectorizer::fit(&train.texts(), cfg)?;
    let dim = vectorizer.vocab.len();
    let train_x: Vec<_> = train.texts().iter().map(|t| vectorizer.transform(t)).collect();
    let test_x: Vec<_> = test.texts().iter().map(|t| vectorizer.transform(t)).collect();
    let mut rows = vec![[false; NUM_QUESTIONS]; test.len()];
    for q in 0..NUM_QUESTIONS {
        let (xs, ys): (Vec<_>, Vec<bool>) = train
            .records()
            .iter()
            .zip(&train_x)
            .filter_map(|(r, x)| r.labels[q].as_binary().map(|y| (x.clone(), y == 1)))
            .unzip();
        if ys.is_empty() {
            return Err(Error::Invalid(format!(
                "question {} has no yes/no label in the training data",
                q + 1
            )));
        }
        let first = ys[0];
        if ys.iter().all(|&y| y == first) {
            rows.iter_mut().for_each(|r| r[q] = first);
            continue;
        }
        let model = Logistic::fit(&xs, &ys, dim, cfg);
        for (row, x) in rows.iter_mut().zip(&test_x) {
            row[q] = model.predict(x);
        }
    }
    LabelMatrix::new(test.ids(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelValue, LabeledTweet, Split};
    use LabelValue::{Nan, No, Yes};

    fn ds(rows: &[(&str, [LabelValue; 7])]) -> Dataset {
        Dataset::new(
            Split::Custom,
            rows.iter()
                .enumerate()
                .map(|(i, (t, l))| LabeledTweet::new(format!("r{i}"), *t, *l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn majority_hand_tally() {
        let train = ds(&[
            ("a", [Yes, No, Nan, Yes, No, No, Yes]),
            ("b", [Yes, No, Yes, No, Nan, No, No]),
            ("c", [No, Yes, No, Nan, Nan, No, Yes]),
        ]);
        // Q1 2:1 yes, Q2 1:2 no, Q3 1:1 tie -> yes, Q4 1:1 -> yes, Q5 0:1 no, Q6 no, Q7 2:1 yes
        let m = majority_baseline(&train, &train).unwrap();
        for row in m.rows() {
            assert_eq!(*row, [true, false, true, true, false, false, true]);
        }
    }

    #[test]
    fn majority_needs_labels() {
        let train = ds(&[("a", [Yes, Nan, Yes, Yes, Yes, Yes, Yes])]);
        assert!(majority_baseline(&train, &train).is_err());
    }

    #[test]
    fn random_is_seeded() {
        let rows: Vec<(String, [LabelValue; 7])> =
            (0..50).map(|i| (format!("t{i}"), [Nan; 7])).collect();
        let rows: Vec<(&str, [LabelValue; 7])> = rows.iter().map(|(t, l)| (t.as_str(), *l)).collect();
        let test = ds(&rows);
        assert_eq!(random_baseline(&test, 4), random_baseline(&test, 4));
        assert_ne!(random_baseline(&test, 4), random_baseline(&test, 5));
    }

    #[test]
    fn ngram_single_class_falls_back() {
        let train = ds(&[
            ("alpha beta", [Yes, No, No, No, No, No, No]),
            ("gamma delta", [Yes, Yes, No, No, No, No, No]),
        ]);
        let test = ds(&[("beta", [Nan; 7]), ("unknown words", [Nan; 7])]);
        let m = ngram_baseline(&train, &test, &NgramConfig::default()).unwrap();
        assert!(m.rows().iter().all(|r| r[0] && !r[2]));
    }

    #[test]
    fn ngram_empty_vocabulary_errors() {
        let train = ds(&[("https://only.a/url", [Yes; 7])]);
        assert!(ngram_baseline(&train, &train, &NgramConfig::default()).is_err());
    }

    #[test]
    fn ngram_features() {
        assert_eq!(ngrams("Hello, World! https://x.y foo", 1, 2), vec![
            "hello", "world", "foo", "hello world", "world foo"
        ]);
    }
}
