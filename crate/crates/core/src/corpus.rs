//! Tweet datasets with seven ternary labels.
//!
//! Files are tab-separated with a header row:
//!
//! ```text
//! tweet_id<TAB>text<TAB>q1<TAB>q2<TAB>q3<TAB>q4<TAB>q5<TAB>q6<TAB>q7
//! ```
//!
//! Label tokens are read case-insensitively and written lowercase. Unlabeled
//! files may carry only the first two columns.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ensemble::LabelMatrix;
use crate::error::{Error, Result};
use crate::io;
use crate::NUM_QUESTIONS;

/// Gold answer to one question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelValue {
    Yes,
    No,
    Nan,
}

impl LabelValue {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelValue::Yes => "yes",
            LabelValue::No => "no",
            LabelValue::Nan => "nan",
        }
    }

    /// 1 for Yes, 0 for No, `None` for Nan.
    pub fn as_binary(self) -> Option<u8> {
        match self {
            LabelValue::Yes => Some(1),
            LabelValue::No => Some(0),
            LabelValue::Nan => None,
        }
    }

    pub fn is_nan(self) -> bool {
        self == LabelValue::Nan
    }

    pub fn from_bool(yes: bool) -> Self {
        if yes {
            LabelValue::Yes
        } else {
            LabelValue::No
        }
    }
}

impl fmt::Display for LabelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Ok(LabelValue::Yes),
            "no" => Ok(LabelValue::No),
            "nan" => Ok(LabelValue::Nan),
            _ => Err(format!("unknown label token `{s}`")),
        }
    }
}

pub type Labels = [LabelValue; NUM_QUESTIONS];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTweet {
    pub id: String,
    pub text: String,
    /// `labels[i]` answers question Q(i+1).
    pub labels: Labels,
}

impl LabeledTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, labels: Labels) -> Result<Self> {
        let tweet = LabeledTweet {
            id: id.into(),
            text: text.into(),
            labels,
        };
        tweet.check()?;
        Ok(tweet)
    }

    pub fn unlabeled(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        Self::new(id, text, [LabelValue::Nan; NUM_QUESTIONS])
    }

    fn check(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Invalid("empty tweet id".into()));
        }
        if self.text.trim().is_empty() {
            return Err(Error::Invalid(format!("tweet `{}` has empty text", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
    Custom,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            "custom" => Ok(Split::Custom),
            _ => Err(format!("unknown split `{s}`")),
        }
    }
}

/// An ordered collection of tweets with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    split: Split,
    records: Vec<LabeledTweet>,
}

impl Dataset {
    pub fn new(split: Split, records: Vec<LabeledTweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.check()?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate tweet id `{}`", r.id)));
            }
        }
        Ok(Dataset { split, records })
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn records(&self) -> &[LabeledTweet] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.text.as_str()).collect()
    }

    pub fn gold(&self) -> Vec<Labels> {
        self.records.iter().map(|r| r.labels).collect()
    }

    /// True if at least one label anywhere is not Nan.
    pub fn has_gold(&self) -> bool {
        self.records
            .iter()
            .any(|r| r.labels.iter().any(|l| !l.is_nan()))
    }

    /// Serializes to the canonical labeled TSV layout.
    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::from(HEADER_LABELED);
        out.push('\n');
        for r in &self.records {
            if r.id.contains(['\t', '\n', '\r']) || r.text.contains(['\t', '\n', '\r']) {
                return Err(Error::Invalid(format!(
                    "tweet `{}` contains a tab or line break and cannot be written as TSV",
                    r.id
                )));
            }
            out.push_str(&r.id);
            out.push('\t');
            out.push_str(&r.text);
            for l in r.labels {
                out.push('\t');
                out.push_str(l.as_str());
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_tsv()?.as_bytes())
    }
}

const HEADER_LABELED: &str = "tweet_id\ttext\tq1\tq2\tq3\tq4\tq5\tq6\tq7";
const LABELED_COLUMNS: usize = 2 + NUM_QUESTIONS;

/// Loads a dataset file.
///
/// The first line is a header and is skipped. With `has_labels` every row must
/// carry the nine columns; without it rows may have two or nine columns and
/// any label columns are ignored (records get seven Nan labels).
pub fn load_dataset(path: &Path, split: Split, has_labels: bool) -> Result<Dataset> {
    let contents = io::read_to_string(path)?;
    parse_dataset(&contents, path, split, has_labels)
}

pub fn parse_dataset(contents: &str, path: &Path, split: Split, has_labels: bool) -> Result<Dataset> {
    let contents = contents.strip_prefix('\u{feff}').unwrap_or(contents);
    let mut records = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in io::lines(contents).enumerate() {
        let line_no = idx + 1;
        if idx == 0 {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let ok = if has_labels {
            cols.len() == LABELED_COLUMNS
        } else {
            cols.len() == 2 || cols.len() == LABELED_COLUMNS
        };
        if !ok {
            let expected = if has_labels { "9" } else { "2 or 9" };
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {expected} tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0].trim();
        let text = cols[1];
        if id.is_empty() {
            return Err(Error::parse(path, line_no, "empty tweet id"));
        }
        if text.trim().is_empty() {
            return Err(Error::parse(path, line_no, format!("tweet `{id}` has empty text")));
        }
        let mut labels = [LabelValue::Nan; NUM_QUESTIONS];
        if has_labels {
            for (q, tok) in cols[2..].iter().enumerate() {
                labels[q] = tok
                    .parse()
                    .map_err(|m: String| Error::parse(path, line_no, format!("q{}: {m}", q + 1)))?;
            }
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(path, line_no, format!("duplicate tweet id `{id}`")));
        }
        records.push(LabeledTweet {
            id: id.to_string(),
            text: text.to_string(),
            labels,
        });
    }
    Ok(Dataset { split, records })
}

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"https?://\S+").expect("valid url regex"))
}

/// Deletes `http://` / `https://` URLs, collapses whitespace runs to one
/// space and trims.
pub fn normalize_text(text: &str) -> String {
    let stripped = url_pattern().replace_all(text, "");
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A record that answers one of Q2-Q5 although Q1 (verifiable claim) is No.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationWarning {
    pub id: String,
    /// 1-based question numbers in 2..=5 whose label is not Nan.
    pub questions: Vec<usize>,
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.questions.iter().map(|q| format!("Q{q}")).collect();
        write!(
            f,
            "tweet `{}`: Q1 is `no` but {} answered",
            self.id,
            qs.join(", ")
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub warnings: Vec<ValidationWarning>,
    /// Offending cells per dependent question, indexed Q2..Q5.
    pub counts: [usize; 4],
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Flags records whose Q2-Q5 answers are inconsistent with Q1 = No.
///
/// These are warnings only: nan sometimes means "not sure" rather than "not
/// applicable", so real data can contain such records.
pub fn validate(dataset: &Dataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    for r in dataset.records() {
        if r.labels[0] != LabelValue::No {
            continue;
        }
        let questions: Vec<usize> = (1..5)
            .filter(|&q| !r.labels[q].is_nan())
            .map(|q| q + 1)
            .collect();
        if questions.is_empty() {
            continue;
        }
        for &q in &questions {
            report.counts[q - 2] += 1;
        }
        report.warnings.push(ValidationWarning {
            id: r.id.clone(),
            questions,
        });
    }
    report
}

const HEADER_SUBMISSION: &str = "tweet_id\tq1\tq2\tq3\tq4\tq5\tq6\tq7";

/// Renders hard labels in submission layout (yes/no tokens only).
pub fn submission_tsv(labels: &LabelMatrix) -> String {
    let mut out = String::from(HEADER_SUBMISSION);
    out.push('\n');
    for (id, row) in labels.ids().iter().zip(labels.rows()) {
        out.push_str(id);
        for &yes in row {
            out.push('\t');
            out.push_str(LabelValue::from_bool(yes).as_str());
        }
        out.push('\n');
    }
    out
}

pub fn write_submission(path: &Path, labels: &LabelMatrix) -> Result<()> {
    io::write_atomic(path, submission_tsv(labels).as_bytes())
}

pub fn read_submission(path: &Path) -> Result<LabelMatrix> {
    let contents = io::read_to_string(path)?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in io::lines(&contents).enumerate() {
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
        if !seen.insert(id.clone()) {
            return Err(Error::parse(path, line_no, format!("duplicate tweet id `{id}`")));
        }
        let mut row = [false; NUM_QUESTIONS];
        for (q, tok) in cols[1..].iter().enumerate() {
            row[q] = match tok.parse::<LabelValue>() {
                Ok(LabelValue::Yes) => true,
                Ok(LabelValue::No) => false,
                Ok(LabelValue::Nan) => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("q{}: submissions may only contain yes/no", q + 1),
                    ))
                }
                Err(m) => return Err(Error::parse(path, line_no, format!("q{}: {m}", q + 1))),
            };
        }
        ids.push(id);
        rows.push(row);
    }
    LabelMatrix::new(ids, rows)
}
