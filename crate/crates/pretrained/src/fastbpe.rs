//! The fastBPE scheme used by BERTweet: `bpe.codes` holds ranked merges,
//! `vocab.txt` holds a fairseq dictionary, and non-final pieces carry `@@`.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

const END: &str = "</w>";

pub struct FastBpe {
    ranks: HashMap<(String, String), usize>,
    vocab: HashMap<String, u32>,
    unk: u32,
    lowercase: bool,
    normalize: bool,
}

/// fairseq reserves the first four ids.
pub const SPECIALS: [&str; 4] = ["<s>", "<pad>", "</s>", "<unk>"];

impl FastBpe {
    pub fn parse(codes: &str, vocab: &str, lowercase: bool, normalize: bool) -> Result<Self, String> {
        let mut ranks = HashMap::new();
        for (rank, line) in codes.lines().enumerate() {
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some(a), Some(b)) => {
                    ranks.entry((a.to_string(), b.to_string())).or_insert(rank);
                }
                _ if line.trim().is_empty() => {}
                _ => return Err(format!("bpe.codes line {}: expected two symbols", rank + 1)),
            }
        }
        let mut ids: HashMap<String, u32> = SPECIALS
            .iter()
            .enumerate()
            .map(|(i, s)| (s.to_string(), i as u32))
            .collect();
        for (n, line) in vocab.lines().enumerate() {
            let line = line.trim();
            let Some(cut) = line.rfind(' ') else {
                return Err(format!("vocab.txt line {}: expected '<token> <count>'", n + 1));
            };
            let next = ids.len() as u32;
            ids.insert(line[..cut].to_string(), next);
        }
        let next = ids.len() as u32;
        ids.entry("<mask>".to_string()).or_insert(next);
        Ok(FastBpe {
            ranks,
            vocab: ids,
            unk: 3,
            lowercase,
            normalize,
        })
    }

    pub fn token_to_id(&self, token: &str) -> Option<u32> {
        self.vocab.get(token).copied()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn bpe(&self, token: &str) -> Vec<String> {
        let chars: Vec<char> = token.chars().collect();
        if chars.len() < 2 {
            return vec![token.to_string()];
        }
        let mut word: Vec<String> = chars.iter().map(|c| c.to_string()).collect();
        word.last_mut().expect("non-empty").push_str(END);
        while word.len() > 1 {
            let best = word
                .windows(2)
                .filter_map(|p| self.ranks.get(&(p[0].clone(), p[1].clone())).map(|&r| (r, p)))
                .min_by_key(|(r, _)| *r);
            let Some((_, pair)) = best else { break };
            let (first, second) = (pair[0].clone(), pair[1].clone());
            let mut merged = Vec::with_capacity(word.len());
            let mut i = 0;
            while i < word.len() {
                if i + 1 < word.len() && word[i] == first && word[i + 1] == second {
                    merged.push(format!("{first}{second}"));
                    i += 2;
                } else {
                    merged.push(word[i].clone());
                    i += 1;
                }
            }
            word = merged;
        }
        let last = word.len() - 1;
        word.into_iter()
            .enumerate()
            .map(|(i, mut w)| {
                if i == last {
                    w.truncate(w.len() - END.len());
                } else {
                    w.push_str("@@");
                }
                w
            })
            .collect()
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        // lowercase first so the `@USER` / `HTTPURL` placeholders keep their case
        let text = if self.lowercase { text.to_lowercase() } else { text.to_string() };
        let text = if self.normalize { normalize_tweet(&text) } else { text };
        text.split_whitespace()
            .flat_map(|w| self.bpe(w))
            .map(|piece| self.vocab.get(&piece).copied().unwrap_or(self.unk))
            .collect()
    }
}

fn tweet_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)https?://\S+|www\.\S+|@\w+|#\w+|[\p{L}\p{N}_]+(?:['\-][\p{L}\p{N}_]+)*|\.\.+|\S")
            .expect("valid token pattern")
    })
}

/// BERTweet's tweet normalization: mentions become `@USER`, links become
/// `HTTPURL`, punctuation is split off and English contractions separated.
/// Emoji are left as they are.
pub fn normalize_tweet(tweet: &str) -> String {
    let tweet = tweet.replace('’', "'").replace('…', "...");
    let tokens: Vec<String> = tweet_token()
        .find_iter(&tweet)
        .map(|m| {
            let t = m.as_str();
            let lower = t.to_lowercase();
            if t.starts_with('@') && t.len() > 1 {
                "@USER".to_string()
            } else if lower.starts_with("http") || lower.starts_with("www") {
                "HTTPURL".to_string()
            } else {
                t.to_string()
            }
        })
        .collect();
    let mut s = tokens.join(" ");
    s.push(' ');
    for (from, to) in [
        ("cannot ", "can not "),
        ("n't ", " n't "),
        ("n 't ", " n't "),
        ("ca n't", "can't"),
        ("ai n't", "ain't"),
        ("'m ", " 'm "),
        ("'re ", " 're "),
        ("'s ", " 's "),
        ("'ll ", " 'll "),
        ("'d ", " 'd "),
        ("'ve ", " 've "),
        (" p . m .", "  p.m."),
        (" p . m ", " p.m "),
        (" a . m .", " a.m."),
        (" a . m ", " a.m "),
    ] {
        s = s.replace(from, to);
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
