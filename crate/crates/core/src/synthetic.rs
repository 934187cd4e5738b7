//! Keyword-labelled synthetic tweets for desk-scale runs.
//!
//! Every question has two trigger words. A tweet answers Yes to a question
//! iff it contains one of that question's triggers; everything else is filler.
//! As in the real annotation scheme, Q2-Q5 are Nan whenever Q1 is No, and a
//! further fraction of cells is Nan at random.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, LabelValue, LabeledTweet, Split};
use crate::NUM_QUESTIONS;

pub const KEYWORDS: [[&str; 2]; NUM_QUESTIONS] = [
    ["claims", "reportedly"],
    ["hoax", "fabricated"],
    ["everyone", "public"],
    ["dangerous", "harmful"],
    ["factcheck", "verify"],
    ["conspiracy", "weaponized"],
    ["authorities", "government"],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub seed: u64,
    /// Probability that a question's trigger is present.
    pub yes_rate: f64,
    /// Probability that an otherwise labelled cell is Nan.
    pub nan_rate: f64,
    pub filler_vocab: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Probability that a tweet carries a trailing URL.
    pub url_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            train: 600,
            dev: 60,
            test: 120,
            seed: 2021,
            yes_rate: 0.5,
            nan_rate: 0.1,
            filler_vocab: 300,
            min_words: 8,
            max_words: 20,
            url_rate: 0.3,
        }
    }
}

fn filler_word(i: usize) -> String {
    const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    let mut word = String::new();
    let mut x = i;
    for _ in 0..3 {
        word.push_str(ONSETS[x % ONSETS.len()]);
        x /= ONSETS.len();
        word.push_str(VOWELS[x % VOWELS.len()]);
        x /= VOWELS.len();
    }
    word
}

fn tweet(rng: &mut ChaCha8Rng, cfg: &SyntheticConfig, filler: &[String]) -> (String, [LabelValue; NUM_QUESTIONS]) {
    let len = rng.random_range(cfg.min_words..=cfg.max_words.max(cfg.min_words));
    let mut words: Vec<String> = (0..len)
        .map(|_| filler.choose(rng).expect("non-empty filler").clone())
        .collect();
    let mut labels = [LabelValue::No; NUM_QUESTIONS];
    for (q, label) in labels.iter_mut().enumerate() {
        let yes = rng.random_bool(cfg.yes_rate);
        if yes {
            let kw = KEYWORDS[q].choose(rng).expect("two keywords");
            let at = rng.random_range(0..=words.len());
            words.insert(at, kw.to_string());
        }
        *label = LabelValue::from_bool(yes);
    }
    if labels[0] == LabelValue::No {
        labels[1..5].fill(LabelValue::Nan);
    }
    for label in labels.iter_mut() {
        if rng.random_bool(cfg.nan_rate) {
            *label = LabelValue::Nan;
        }
    }
    if rng.random_bool(cfg.url_rate) {
        words.push(format!("https://t.co/{:08x}", rng.random::<u32>()));
    }
    (words.join(" "), labels)
}

fn split(rng: &mut ChaCha8Rng, cfg: &SyntheticConfig, filler: &[String], name: &str, split: Split, n: usize) -> Dataset {
    let records = (0..n)
        .map(|i| {
            let (text, labels) = tweet(rng, cfg, filler);
            LabeledTweet::new(format!("{name}-{i:05}"), text, labels).expect("non-empty synthetic tweet")
        })
        .collect();
    Dataset::new(split, records).expect("unique synthetic ids")
}

/// Train, dev and test splits drawn from one seeded stream.
pub fn generate(cfg: &SyntheticConfig) -> (Dataset, Dataset, Dataset) {
    let filler: Vec<String> = (0..cfg.filler_vocab.max(1)).map(filler_word).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let train = split(&mut rng, cfg, &filler, "train", Split::Train, cfg.train);
    let dev = split(&mut rng, cfg, &filler, "dev", Split::Dev, cfg.dev);
    let test = split(&mut rng, cfg, &filler, "test", Split::Test, cfg.test);
    (train, dev, test)
}
