use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io;
use crate::NUM_QUESTIONS;

/// Per-tweet sigmoid scores for the seven questions, shape `(n, 7)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    ids: Vec<String>,
    values: Array2<f64>,
}

const HEADER: &str = "tweet_id\ts1\ts2\ts3\ts4\ts5\ts6\ts7";

impl ScoreMatrix {
    pub fn new(ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (ids.len(), NUM_QUESTIONS) {
            return Err(Error::Shape(format!(
                "score matrix {:?} for {} ids",
                values.dim(),
                ids.len()
            )));
        }
        if let Some(bad) = values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Invalid(format!("score {bad} outside [0, 1]")));
        }
        Ok(ScoreMatrix { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Score file contents; every score is printed with six decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(16 + self.len() * 64);
        out.push_str(HEADER);
        out.push('\n');
        for (id, row) in self.ids.iter().zip(self.values.outer_iter()) {
            out.push_str(id);
            for s in row {
                let _ = write!(out, "\t{s:.6}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let contents = io::read_to_string(path)?;
        Self::parse(&contents, path)
    }

    pub fn parse(contents: &str, path: &Path) -> Result<Self> {
        let mut ids = Vec::new();
        let mut flat = Vec::new();
        let mut seen = HashSet::new();
        for (idx, line) in io::lines(contents).enumerate() {
            if idx == 0 {
                continue;
            }
            let line_no = idx + 1;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 1 + NUM_QUESTIONS {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 8 tab-separated columns, found {}", cols.len()),
                ));
            }
            let id = cols[0].trim().to_string();
            if id.is_empty() || !seen.insert(id.clone()) {
                return Err(Error::parse(path, line_no, format!("empty or duplicate id `{id}`")));
            }
            for (q, tok) in cols[1..].iter().enumerate() {
                let s: f64 = tok.trim().parse().map_err(|_| {
                    Error::parse(path, line_no, format!("s{}: `{tok}` is not a number", q + 1))
                })?;
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("s{}: score {s} outside [0, 1]", q + 1),
                    ));
                }
                flat.push(s);
            }
            ids.push(id);
        }
        let values = Array2::from_shape_vec((ids.len(), NUM_QUESTIONS), flat)
            .expect("row lengths checked");
        Ok(ScoreMatrix { ids, values })
    }
}
