use std::fs;
use std::path::{Path, PathBuf};

use infodemic::analysis::{label_distribution, phi_matrix, render_charts};
use infodemic::corpus::{load_dataset, read_submission, write_submission};
use infodemic::ensemble::vote_files;
use infodemic::evaluation::{majority_baseline, ngram_baseline, random_baseline};
use infodemic::modeling::{train as fine_tune, Checkpoint};
use infodemic::synthetic::{generate, SyntheticConfig};
use infodemic::{full_report, Dataset, Split, NUM_QUESTIONS};

use crate::config::{slug, RunConfig};
use crate::{BaselineKind, CliError};

type Result<T = ()> = std::result::Result<T, CliError>;

/// Loads a dataset, keeping labels when the header carries the q1..q7 columns.
fn load_any(path: &Path, split: Split) -> Result<Dataset> {
    let text = infodemic::io::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("");
    let labelled = header.split('\t').count() == 2 + NUM_QUESTIONS;
    Ok(infodemic::corpus::parse_dataset(&text, path, split, labelled)?)
}

fn create_dir(dir: &Path) -> Result {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Core(infodemic::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

pub fn analyze(cfg: &RunConfig, input: Option<&Path>) -> Result {
    let path = match input {
        Some(p) => p,
        None => cfg.path("train")?,
    };
    let data = load_dataset(path, Split::Train, true)?;
    let files = render_charts(&label_distribution(&data), &phi_matrix(&data), &cfg.out.join("analysis"))?;
    print!("{}", label_distribution(&data).to_tsv());
    for f in files.all() {
        log::info!("wrote {}", f.display());
    }
    Ok(())
}

pub fn train(cfg: &RunConfig, backend: Option<&str>) -> Result {
    let roster: Vec<&str> = match backend {
        Some(b) => vec![b],
        None => cfg.roster.iter().map(String::as_str).collect(),
    };
    // validate everything up front so a bad override fails before any training
    let settings = roster
        .iter()
        .map(|id| {
            let tc = cfg.train_config(id)?;
            tc.validate()?;
            Ok(tc)
        })
        .collect::<Result<Vec<_>>>()?;
    let train_set = load_dataset(cfg.path("train")?, Split::Train, true)?;
    let dev_set = load_dataset(cfg.path("dev")?, Split::Dev, true)?;
    let test_set = match &cfg.data.test {
        Some(p) => Some(load_any(p, Split::Test)?),
        None => None,
    };
    let registry = infodemic_pretrained::registry();
    let scores_dir = cfg.out.join("scores");
    create_dir(&scores_dir)?;

    for (id, tc) in roster.iter().zip(settings) {
        let name = format!("{}-seed{}", slug(id), tc.seed);
        log::info!("fine-tuning {id} as {name}");
        let encoder = registry.create(id, tc.seed)?;
        let ckpt = fine_tune(encoder, &tc, &train_set, &dev_set)?;
        ckpt.save(&cfg.out.join("models").join(&name))?;
        ckpt.predict(&dev_set)?.save(&scores_dir.join(format!("{name}.dev.tsv")))?;
        if let Some(test) = &test_set {
            ckpt.predict(test)?.save(&scores_dir.join(format!("{name}.test.tsv")))?;
        }
        println!(
            "{id}\tseed {}\tepoch {}/{}\tdev mean F1 {:.1}",
            tc.seed,
            ckpt.meta.epoch,
            tc.epochs,
            100.0 * ckpt.meta.metric
        );
    }
    Ok(())
}

pub fn predict(cfg: &RunConfig, checkpoint: &Path, input: &Path, output: Option<&Path>) -> Result {
    let registry = infodemic_pretrained::registry();
    let ckpt = Checkpoint::load(checkpoint, &registry)?;
    let data = load_any(input, Split::Custom)?;
    let output = match output {
        Some(p) => p.to_path_buf(),
        None => {
            let model = checkpoint.file_name().map_or("model".into(), |n| n.to_string_lossy());
            let stem = input.file_stem().map_or("input".into(), |n| n.to_string_lossy());
            cfg.out.join("scores").join(format!("{model}.{stem}.tsv"))
        }
    };
    if let Some(dir) = output.parent() {
        create_dir(dir)?;
    }
    ckpt.predict(&data)?.save(&output)?;
    log::info!("wrote {}", output.display());
    Ok(())
}

fn default_score_files(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = cfg.out.join("scores");
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| CliError::Usage(format!("no score files given and {} is unreadable: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".test.tsv"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn vote(cfg: &RunConfig, files: &[PathBuf], output: Option<&Path>) -> Result {
    let files = if files.is_empty() { default_score_files(cfg)? } else { files.to_vec() };
    if files.is_empty() {
        return Err(CliError::Usage("no score files to vote over".into()));
    }
    let paths: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let labels = vote_files(&paths, &cfg.vote)?;
    let output = output.map_or_else(|| cfg.out.join("submission.tsv"), Path::to_path_buf);
    if let Some(dir) = output.parent() {
        create_dir(dir)?;
    }
    write_submission(&output, &labels)?;
    log::info!("voted over {} score files into {}", files.len(), output.display());
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, pred: &Path, gold: Option<&Path>, report: Option<&Path>) -> Result {
    let gold = match gold {
        Some(p) => p,
        None => cfg.path("test")?,
    };
    let predictions = read_submission(pred)?;
    let gold = load_dataset(gold, Split::Test, true)?;
    let metrics = full_report(&predictions, &gold)?;
    let report = report.map_or_else(|| cfg.out.join("report.tsv"), Path::to_path_buf);
    if let Some(dir) = report.parent() {
        create_dir(dir)?;
    }
    infodemic::io::write_atomic(&report, metrics.to_tsv().as_bytes())?;
    print!("{}", metrics.to_table());
    Ok(())
}

pub fn baseline(cfg: &RunConfig, kind: BaselineKind, output: Option<&Path>) -> Result {
    let test = load_any(cfg.path("test")?, Split::Test)?;
    let labels = match kind {
        BaselineKind::Random => random_baseline(&test, cfg.seed),
        BaselineKind::Majority => majority_baseline(&load_dataset(cfg.path("train")?, Split::Train, true)?, &test)?,
        BaselineKind::Ngram => {
            ngram_baseline(&load_dataset(cfg.path("train")?, Split::Train, true)?, &test, &cfg.ngram)?
        }
    };
    let name = match kind {
        BaselineKind::Majority => "majority",
        BaselineKind::Ngram => "ngram",
        BaselineKind::Random => "random",
    };
    let output = output.map_or_else(|| cfg.out.join(format!("baseline-{name}.tsv")), Path::to_path_buf);
    if let Some(dir) = output.parent() {
        create_dir(dir)?;
    }
    write_submission(&output, &labels)?;
    log::info!("wrote {}", output.display());
    Ok(())
}

pub fn synth(cfg: &RunConfig, train: usize, dev: usize, test: usize) -> Result {
    let (tr, dv, te) = generate(&SyntheticConfig {
        train,
        dev,
        test,
        seed: cfg.seed,
        ..SyntheticConfig::default()
    });
    create_dir(&cfg.out)?;
    for (name, data) in [("train", &tr), ("dev", &dv), ("test", &te)] {
        let path = cfg.out.join(format!("{name}.tsv"));
        data.save(&path)?;
        log::info!("wrote {} ({} tweets)", path.display(), data.len());
    }
    Ok(())
}
