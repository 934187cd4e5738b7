//! Tokenizers for BERT (WordPiece), RoBERTa (byte-level BPE) and BERTweet
//! (fastBPE) checkpoints, restored from whatever files the checkpoint ships.

use std::fs;
use std::path::Path;

use infodemic::{Error, Result};
use serde_json::Value;
use tokenizers::models::bpe::BPE;
use tokenizers::models::wordpiece::WordPiece;
use tokenizers::normalizers::bert::BertNormalizer;
use tokenizers::pre_tokenizers::bert::BertPreTokenizer;
use tokenizers::pre_tokenizers::byte_level::ByteLevel;
use tokenizers::Tokenizer;

use crate::fastbpe::FastBpe;

/// Files that may define a tokenizer, in the order they are consulted.
pub const TOKENIZER_FILES: [&str; 6] = [
    "tokenizer.json",
    "tokenizer_config.json",
    "bpe.codes",
    "vocab.json",
    "merges.txt",
    "vocab.txt",
];

enum Backend {
    Hf(Box<Tokenizer>),
    FastBpe(FastBpe),
}

pub struct TextTokenizer {
    backend: Backend,
    pub cls_id: u32,
    pub sep_id: u32,
    pub pad_id: u32,
    /// Raw bytes of the files this tokenizer was built from.
    files: Vec<(String, Vec<u8>)>,
}

fn backend_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Backend(format!("{}: {e}", path.display()))
}

fn read(dir: &Path, name: &str) -> Result<Option<Vec<u8>>> {
    let path = dir.join(name);
    match fs::read(&path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(backend_err(&path, e)),
    }
}

fn utf8(dir: &Path, name: &str, bytes: &[u8]) -> Result<String> {
    String::from_utf8(bytes.to_vec()).map_err(|e| backend_err(&dir.join(name), e))
}

impl TextTokenizer {
    /// Builds the tokenizer found in `dir`. `lowercase_hint` is used when
    /// the directory does not say whether text is lowercased.
    pub fn from_dir(dir: &Path, lowercase_hint: bool) -> Result<Self> {
        let mut files = Vec::new();
        for name in TOKENIZER_FILES {
            if let Some(b) = read(dir, name)? {
                files.push((name.to_string(), b));
            }
        }
        let get = |name: &str| files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice());
        let lowercase = match get("tokenizer_config.json") {
            Some(b) => serde_json::from_slice::<Value>(b)
                .ok()
                .and_then(|v| v.get("do_lower_case").and_then(Value::as_bool))
                .unwrap_or(lowercase_hint),
            None => lowercase_hint,
        };

        let backend = if let Some(b) = get("tokenizer.json") {
            Backend::Hf(Box::new(
                Tokenizer::from_bytes(b).map_err(|e| backend_err(&dir.join("tokenizer.json"), e))?,
            ))
        } else if let (Some(codes), Some(vocab)) = (get("bpe.codes"), get("vocab.txt")) {
            let codes = utf8(dir, "bpe.codes", codes)?;
            let vocab = utf8(dir, "vocab.txt", vocab)?;
            Backend::FastBpe(FastBpe::parse(&codes, &vocab, lowercase, true).map_err(|e| backend_err(dir, e))?)
        } else if get("vocab.json").is_some() && get("merges.txt").is_some() {
            let bpe = BPE::from_file(
                &dir.join("vocab.json").to_string_lossy(),
                &dir.join("merges.txt").to_string_lossy(),
            )
            .build()
            .map_err(|e| backend_err(dir, e))?;
            let mut tok = Tokenizer::new(bpe);
            tok.with_pre_tokenizer(Some(ByteLevel::new(false, true, true)));
            Backend::Hf(Box::new(tok))
        } else if get("vocab.txt").is_some() {
            let wp = WordPiece::from_file(&dir.join("vocab.txt").to_string_lossy())
                .unk_token("[UNK]".into())
                .build()
                .map_err(|e| backend_err(&dir.join("vocab.txt"), e))?;
            let mut tok = Tokenizer::new(wp);
            tok.with_normalizer(Some(BertNormalizer::new(true, true, None, lowercase)))
                .map_err(|e| backend_err(dir, e))?;
            tok.with_pre_tokenizer(Some(BertPreTokenizer));
            Backend::Hf(Box::new(tok))
        } else {
            return Err(Error::Backend(format!(
                "{}: no tokenizer files (looked for {})",
                dir.display(),
                TOKENIZER_FILES.join(", ")
            )));
        };

        let lookup = |candidates: &[&str]| -> Option<u32> {
            candidates.iter().find_map(|t| match &backend {
                Backend::Hf(tok) => tok.token_to_id(t),
                Backend::FastBpe(b) => b.token_to_id(t),
            })
        };
        let (cls_id, sep_id, pad_id) = match (
            lookup(&["[CLS]", "<s>"]),
            lookup(&["[SEP]", "</s>"]),
            lookup(&["[PAD]", "<pad>"]),
        ) {
            (Some(c), Some(s), Some(p)) => (c, s, p),
            _ => {
                return Err(Error::Backend(format!(
                    "{}: vocabulary lacks classification, separator or padding tokens",
                    dir.display()
                )))
            }
        };
        Ok(TextTokenizer {
            backend,
            cls_id,
            sep_id,
            pad_id,
            files,
        })
    }

    pub fn vocab_size(&self) -> usize {
        match &self.backend {
            Backend::Hf(t) => t.get_vocab_size(true),
            Backend::FastBpe(b) => b.vocab_size(),
        }
    }

    /// Subword ids of `text` without special tokens.
    pub fn encode_plain(&self, text: &str) -> Vec<u32> {
        match &self.backend {
            Backend::Hf(t) => match t.encode(text, false) {
                Ok(enc) => enc.get_ids().to_vec(),
                Err(e) => {
                    log::warn!("tokenization failed, scoring as empty text: {e}");
                    Vec::new()
                }
            },
            Backend::FastBpe(b) => b.encode(text),
        }
    }

    /// `[CLS] pieces [SEP]`, with the pieces truncated so the whole sequence
    /// is at most `max_len` (and at least 2) ids long.
    pub fn encode(&self, text: &str, max_len: usize) -> Vec<u32> {
        let mut ids = self.encode_plain(text);
        ids.truncate(max_len.max(2) - 2);
        let mut out = Vec::with_capacity(ids.len() + 2);
        out.push(self.cls_id);
        out.extend(ids);
        out.push(self.sep_id);
        out
    }

    /// Copies the defining files into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        for (name, bytes) in &self.files {
            infodemic::io::write_atomic(&dir.join(name), bytes)?;
        }
        Ok(())
    }
}
