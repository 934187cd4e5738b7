//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 2021
//! out = "runs/paper"
//! roster = ["vinai/bertweet-covid19-base-uncased", "..."]
//!
//! [data]
//! train = "data/train.tsv"
//! dev = "data/dev.tsv"
//! test = "data/test.tsv"
//!
//! [train]                      # applies to every backend
//! epochs = 15
//!
//! [overrides."vinai/bertweet-covid19-base-uncased"]
//! batch_size = 8
//!
//! [vote]
//! threshold = 0.5
//! tie_rule = "mean-score"
//!
//! [ngram]
//! max_n = 2
//! ```
//!
//! Relative paths are resolved against the directory holding the file.
//! Omitted fields take the published fine-tuning settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use infodemic::evaluation::NgramConfig;
use infodemic::{TrainConfig, VoteConfig};
use serde::Deserialize;

use crate::CliError;

pub const PAPER_ROSTER: [&str; 6] = [
    "vinai/bertweet-covid19-base-uncased",
    "digitalepidemiologylab/covid-twitter-bert-v2",
    "cardiffnlp/twitter-roberta-base-hate",
    "cardiffnlp/twitter-roberta-base-emotion",
    "cardiffnlp/twitter-roberta-base-irony",
    "cardiffnlp/twitter-roberta-base-offensive",
];

pub const DEFAULT_SEED: u64 = 2021;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub data: DataPaths,
    pub roster: Vec<String>,
    /// Partial [`TrainConfig`] shared by all backends.
    pub train: toml::Table,
    /// Partial [`TrainConfig`]s keyed by backend id, applied after `train`.
    pub overrides: BTreeMap<String, toml::Table>,
    pub vote: VoteConfig,
    pub ngram: NgramConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            out: PathBuf::from("runs"),
            data: DataPaths::default(),
            roster: PAPER_ROSTER.iter().map(|s| s.to_string()).collect(),
            train: toml::Table::new(),
            overrides: BTreeMap::new(),
            vote: VoteConfig::default(),
            ngram: NgramConfig::default(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = infodemic::io::read_to_string(path)?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        anchor(&mut cfg.out);
        for p in [&mut cfg.data.train, &mut cfg.data.dev, &mut cfg.data.test].into_iter().flatten() {
            anchor(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.roster.is_empty() {
            return Err(usage("roster must name at least one backend"));
        }
        if let Some(id) = self.overrides.keys().find(|id| !self.roster.contains(id)) {
            return Err(usage(format!("overrides given for `{id}`, which is not in the roster")));
        }
        self.vote.validate()?;
        for id in &self.roster {
            self.train_config(id)?.validate()?;
        }
        Ok(())
    }

    /// Defaults, then `[train]`, then `[overrides.<id>]`. The run seed is
    /// used unless one of the tables sets `seed`.
    pub fn train_config(&self, backend: &str) -> Result<TrainConfig, CliError> {
        let defaults = TrainConfig {
            seed: self.seed,
            ..TrainConfig::default()
        };
        let mut table = toml::Table::try_from(&defaults).map_err(|e| usage(e.to_string()))?;
        let layers = std::iter::once(&self.train).chain(self.overrides.get(backend));
        for layer in layers {
            for (k, v) in layer {
                table.insert(k.clone(), v.clone());
            }
        }
        table
            .try_into()
            .map_err(|e| usage(format!("training settings for `{backend}`: {e}")))
    }

    pub fn path(&self, which: &str) -> Result<&Path, CliError> {
        let p = match which {
            "train" => &self.data.train,
            "dev" => &self.data.dev,
            _ => &self.data.test,
        };
        p.as_deref()
            .ok_or_else(|| usage(format!("no {which} dataset: set data.{which} in the config file")))
    }
}

/// File-name-safe form of a backend id: `owner/name` becomes `owner--name`.
pub fn slug(id: &str) -> String {
    let s: String = id
        .replace('/', "--")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    s.trim_matches(|c| c == '-' || c == '.' || c == '_').to_string()
}
