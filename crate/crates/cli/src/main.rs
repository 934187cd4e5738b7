//! `infodemic`: analyse, fine-tune, ensemble and score seven-question
//! misinformation labels for tweets.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on bad input or
//! configuration.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Core(infodemic::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<infodemic::Error> for CliError {
    fn from(e: infodemic::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "infodemic", version, about = "Tweet misinformation labelling: fine-tune, vote, evaluate")]
struct Cli {
    /// Run configuration (TOML). Without it the built-in defaults apply.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Label distribution and pairwise φ of a labelled dataset, as SVG + TSV.
    Analyze {
        /// Dataset to analyse (default: the configured train set).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fine-tune one backend (default: every roster entry in turn), select
    /// the best dev epoch and score the dev and test sets.
    Train {
        #[arg(long)]
        backend: Option<String>,
    },
    /// Score a dataset with a saved checkpoint.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Score file to write (default: `<out>/scores/<model>.<input stem>.tsv`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Majority vote over score files (default: `<out>/scores/*.test.tsv`).
    Vote {
        files: Vec<PathBuf>,
        /// Submission file to write (default: `<out>/submission.tsv`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-question weighted precision, recall and F1 of a submission file.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        /// Gold dataset (default: the configured test set).
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Report file to write (default: `<out>/report.tsv`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Baseline predictions for the test set in submission format.
    Baseline {
        #[arg(value_enum)]
        kind: BaselineKind,
        /// Default: `<out>/baseline-<kind>.tsv`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Writes a keyword-labelled synthetic train/dev/test split to `<out>`.
    Synth {
        #[arg(long, default_value_t = 600)]
        train: usize,
        #[arg(long, default_value_t = 60)]
        dev: usize,
        #[arg(long, default_value_t = 120)]
        test: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Majority,
    Ngram,
    Random,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    match cli.command {
        Command::Analyze { input } => commands::analyze(&cfg, input.as_deref()),
        Command::Train { backend } => commands::train(&cfg, backend.as_deref()),
        Command::Predict {
            checkpoint,
            input,
            output,
        } => commands::predict(&cfg, &checkpoint, &input, output.as_deref()),
        Command::Vote { files, output } => commands::vote(&cfg, &files, output.as_deref()),
        Command::Evaluate { pred, gold, report } => {
            commands::evaluate(&cfg, &pred, gold.as_deref(), report.as_deref())
        }
        Command::Baseline { kind, output } => commands::baseline(&cfg, kind, output.as_deref()),
        Command::Synth { train, dev, test } => commands::synth(&cfg, train, dev, test),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
