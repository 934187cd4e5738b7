//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every oracle here is computed independently of the library path
//! it checks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use infodemic::analysis::{pair_counts, phi_pair, PairCounts};
use infodemic::corpus::{self, LabelValue, Labels, LabeledTweet, Split};
use infodemic::ensemble::{majority_vote, majority_vote_with_stats, ScoreTensor, TieRule, VoteConfig};
use infodemic::evaluation::{full_report, majority_baseline, question_prf};
use infodemic::modeling::{
    masked_bce, masked_bce_with_logits, sigmoid, train, ClassificationHead, Registry, ScoreMatrix,
    TrainConfig, TOY_ID,
};
use infodemic::synthetic::{self, SyntheticConfig};
use infodemic::{Dataset, LabelMatrix, NUM_QUESTIONS};
use ndarray::{Array2, Array3, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_labels(rng: &mut ChaCha8Rng, nan_rate: f64) -> Labels {
    std::array::from_fn(|_| {
        if rng.random_bool(nan_rate) {
            LabelValue::Nan
        } else {
            LabelValue::from_bool(rng.random_bool(0.5))
        }
    })
}

fn dataset_from(labels: &[Labels]) -> Dataset {
    Dataset::new(
        Split::Custom,
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| LabeledTweet::new(format!("r{i}"), "text", *l).unwrap())
            .collect(),
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// 1. masked loss vs scalar loop

fn oracle_masked_bce(scores: &[[f64; 7]], gold: &[Labels]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0.0;
    for i in 0..scores.len() {
        for q in 0..7 {
            let y = match gold[i][q] {
                LabelValue::Yes => 1.0,
                LabelValue::No => 0.0,
                LabelValue::Nan => continue,
            };
            let s = scores[i][q];
            sum += -(y * s.ln() + (1.0 - y) * (1.0 - s).ln());
            n += 1.0;
        }
    }
    if n == 0.0 {
        0.0
    } else {
        sum / n
    }
}

fn ac1_masked_loss() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let scores: Vec<[f64; 7]> = (0..16)
            .map(|_| std::array::from_fn(|_| rng.random_range(1e-4..1.0 - 1e-4)))
            .collect();
        let gold: Vec<Labels> = (0..16).map(|_| random_labels(&mut rng, 0.3)).collect();
        let flat: Vec<f64> = scores.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((16, 7), flat).unwrap();
        let got = masked_bce(arr.view(), &gold).map_err(|e| e.to_string())?;
        let want = oracle_masked_bce(&scores, &gold);
        worst = worst.max((got - want).abs());
        // logit route must agree as well
        let logits = arr.mapv(|s| (s / (1.0 - s)).ln());
        let (via_logits, _) = masked_bce_with_logits(logits.view(), &gold).map_err(|e| e.to_string())?;
        worst = worst.max((via_logits - want).abs());
    }
    ensure(worst <= 1e-9, || format!("max |loss - oracle| = {worst:e}"))?;
    let all_nan = vec![[LabelValue::Nan; 7]; 16];
    let z = masked_bce(Array2::from_elem((16, 7), 0.3).view(), &all_nan).map_err(|e| e.to_string())?;
    ensure(z == 0.0, || format!("all-nan loss {z}"))?;
    Ok(format!("max abs diff {worst:.2e} over 100 fixtures; all-nan loss 0"))
}

// ---------------------------------------------------------------------------
// 2. gradient check through a d = 8 head

fn ac2_gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-4;
    let d = 8;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = Array2::from_shape_simple_fn((16, d), || rng.random_range(-2.0..2.0));
        let gold: Vec<Labels> = (0..16).map(|_| random_labels(&mut rng, 0.3)).collect();
        let mut head = ClassificationHead::zeros(d, 0.0);
        head.weight = Array2::from_shape_simple_fn((7, d), || rng.random_range(-0.5..0.5));
        head.bias = ndarray::Array1::from_shape_simple_fn(7, || rng.random_range(-0.5..0.5));

        let (logits, cache) = head.forward_with_mask(x.view(), Array2::ones((16, d)));
        let (_, grad_logits) = masked_bce_with_logits(logits.view(), &gold).map_err(|e| e.to_string())?;
        let grads = head.backward(&cache, grad_logits.view());

        let loss = |hd: &ClassificationHead| -> f64 {
            let s = hd.logits(x.view()).unwrap().mapv(sigmoid);
            masked_bce(s.view(), &gold).unwrap()
        };
        let mut compare = |analytic: f64, numeric: f64| {
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max(rel);
        };
        for q in 0..7 {
            for j in 0..d {
                let mut up = head.clone();
                up.weight[[q, j]] += h;
                let mut down = head.clone();
                down.weight[[q, j]] -= h;
                compare(grads.weight[[q, j]], (loss(&up) - loss(&down)) / (2.0 * h));
            }
            let mut up = head.clone();
            up.bias[q] += h;
            let mut down = head.clone();
            down.bias[q] -= h;
            compare(grads.bias[q], (loss(&up) - loss(&down)) / (2.0 * h));
        }
    }
    ensure(worst < 1e-4, || format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e} over 20 fixtures (step 1e-4)"))
}

// ---------------------------------------------------------------------------
// 3. vote oracle

fn oracle_vote(scores: &[f64], rule: TieRule) -> bool {
    let rounded: Vec<u32> = scores.iter().map(|&s| if s >= 0.5 { 1 } else { 0 }).collect();
    let yes: u32 = rounded.iter().sum();
    let m = scores.len() as u32;
    if 2 * yes > m {
        true
    } else if 2 * yes < m {
        false
    } else {
        match rule {
            TieRule::MeanScore => scores.iter().sum::<f64>() / scores.len() as f64 >= 0.5,
            TieRule::AlwaysYes => true,
            TieRule::AlwaysNo => false,
        }
    }
}

fn ac3_vote_oracle() -> Outcome {
    let grid = [0.2, 0.5, 0.8];
    let mut checked = 0usize;
    for m in [1usize, 3, 6] {
        let patterns: Vec<Vec<f64>> = (0..3usize.pow(m as u32))
            .map(|mut code| {
                (0..m)
                    .map(|_| {
                        let v = grid[code % 3];
                        code /= 3;
                        v
                    })
                    .collect()
            })
            .collect();
        // one pattern per cell, laid out row-major over (row, question)
        let rows = patterns.len().div_ceil(NUM_QUESTIONS);
        let mut values = Array3::from_elem((m, rows, NUM_QUESTIONS), 0.2);
        for (p, pat) in patterns.iter().enumerate() {
            for (k, &s) in pat.iter().enumerate() {
                values[[k, p / NUM_QUESTIONS, p % NUM_QUESTIONS]] = s;
            }
        }
        let ids: Vec<String> = (0..rows).map(|i| i.to_string()).collect();
        let models: Vec<String> = (0..m).map(|k| k.to_string()).collect();
        let tensor = ScoreTensor::from_array(models, ids, values).map_err(|e| e.to_string())?;
        for rule in [TieRule::MeanScore, TieRule::AlwaysYes, TieRule::AlwaysNo] {
            let cfg = VoteConfig { threshold: 0.5, tie_rule: rule };
            let got = majority_vote(&tensor, &cfg).map_err(|e| e.to_string())?;
            for (p, pat) in patterns.iter().enumerate() {
                let want = oracle_vote(pat, rule);
                ensure(got.get(p / NUM_QUESTIONS, p % NUM_QUESTIONS) == want, || {
                    format!("m={m} pattern {pat:?} rule {rule:?}: expected {want}")
                })?;
                checked += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in 0..1000 {
        let m = rng.random_range(1..=7);
        let n = rng.random_range(1..=6);
        let values = Array3::from_shape_simple_fn((m, n, NUM_QUESTIONS), || {
            if rng.random_bool(0.2) {
                0.5
            } else {
                rng.random_range(0.0..=1.0)
            }
        });
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let models: Vec<String> = (0..m).map(|k| k.to_string()).collect();
        let rule = [TieRule::MeanScore, TieRule::AlwaysYes, TieRule::AlwaysNo][t % 3];
        let cfg = VoteConfig { threshold: 0.5, tie_rule: rule };
        let tensor = ScoreTensor::from_array(models.clone(), ids.clone(), values.clone()).unwrap();
        let (base, stats) = majority_vote_with_stats(&tensor, &cfg).unwrap();
        if m % 2 == 1 {
            ensure(stats.ties == 0, || format!("tie reached with odd m={m}"))?;
        }

        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(&mut rng);
        let shuffled = values.select(Axis(0), &perm);
        let permuted = ScoreTensor::from_array(models.clone(), ids.clone(), shuffled).unwrap();
        ensure(majority_vote(&permuted, &cfg).unwrap() == base, || {
            format!("tensor {t}: model permutation changed the vote")
        })?;

        for i in 0..n {
            for q in 0..NUM_QUESTIONS {
                let yes: Vec<bool> = (0..m).map(|k| values[[k, i, q]] >= 0.5).collect();
                if yes.iter().all(|&y| y == yes[0]) {
                    ensure(base.get(i, q) == yes[0], || {
                        format!("tensor {t}: unanimous cell ({i},{q}) not respected")
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "{checked} enumerated cells match for m in {{1,3,6}} x 3 tie rules; permutation, unanimity and odd-m no-tie hold on 1000 random tensors"
    ))
}

// ---------------------------------------------------------------------------
// 4. metric oracle

/// Confusion-table oracle: class-wise counts from a 2x2 table indexed by
/// (gold, pred), weighted by gold class frequencies.
fn oracle_prf(pred: &[bool], gold: &[LabelValue]) -> Option<(f64, f64, f64, usize)> {
    let mut table = [[0usize; 2]; 2];
    for (p, g) in pred.iter().zip(gold) {
        let g = match g {
            LabelValue::Yes => 1,
            LabelValue::No => 0,
            LabelValue::Nan => continue,
        };
        table[g][usize::from(*p)] += 1;
    }
    let support = table[0][0] + table[0][1] + table[1][0] + table[1][1];
    if support == 0 {
        return None;
    }
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for c in 0..2 {
        let tp = table[c][c] as f64;
        let col = (table[0][c] + table[1][c]) as f64;
        let row = (table[c][0] + table[c][1]) as f64;
        let p = if col > 0.0 { tp / col } else { 0.0 };
        let r = if row > 0.0 { tp / row } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = row / support as f64;
        wp += w * p;
        wr += w * r;
        wf += w * f;
    }
    Some((wp, wr, wf, support))
}

fn ac4_metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let gold: Vec<Labels> = (0..50).map(|_| random_labels(&mut rng, 0.2)).collect();
        let yes_bias: f64 = rng.random_range(0.0..=1.0);
        let rows: Vec<[bool; 7]> = (0..50)
            .map(|_| std::array::from_fn(|_| rng.random_bool(yes_bias)))
            .collect();
        let ds = dataset_from(&gold);
        let pred = LabelMatrix::new(ds.ids(), rows.clone()).unwrap();
        for q in 0..NUM_QUESTIONS {
            let got = question_prf(&pred, &ds, q).map_err(|e| e.to_string())?;
            let col_pred: Vec<bool> = rows.iter().map(|r| r[q]).collect();
            let col_gold: Vec<LabelValue> = gold.iter().map(|g| g[q]).collect();
            match (got.scores, oracle_prf(&col_pred, &col_gold)) {
                (Some(s), Some((p, r, f, n))) => {
                    ensure(got.support == n, || format!("support {} vs {n}", got.support))?;
                    worst = worst
                        .max((s.precision - p).abs())
                        .max((s.recall - r).abs())
                        .max((s.f1 - f).abs());
                }
                (None, None) => {}
                (a, b) => return Err(format!("definedness differs: {a:?} vs {b:?}")),
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max |metric - oracle| = {worst:e}"))?;

    // all-majority predictions: weighted P = p^2, weighted R = p
    let mut worst_identity = 0.0f64;
    for yes in 1..50usize {
        let p = yes as f64 / 50.0;
        let gold: Vec<Labels> = (0..50)
            .map(|i| [LabelValue::from_bool(i < yes); 7])
            .collect();
        let ds = dataset_from(&gold);
        let pred = LabelMatrix::constant(ds.ids(), [true; 7]);
        let m = question_prf(&pred, &ds, 0).unwrap().scores.unwrap();
        worst_identity = worst_identity
            .max((m.precision - p * p).abs())
            .max((m.recall - p).abs());
    }
    ensure(worst_identity <= 1e-12, || format!("closed form off by {worst_identity:e}"))?;
    // the published majority baseline: R = 88.3 implies P ~= 0.883^2 = 78.0 (reported 78.6)
    Ok(format!(
        "max abs diff {worst:.2e} over 1000 fixtures x 7 questions; P=p^2, R=p within {worst_identity:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 5. phi vs Pearson

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.is_empty() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

fn ac5_phi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut undefined = 0usize;
    for _ in 0..1000 {
        let n = rng.random_range(0..=12);
        let gold: Vec<Labels> = (0..n).map(|_| random_labels(&mut rng, 0.25)).collect();
        let ds = dataset_from(&gold);
        let qa = rng.random_range(1..=7);
        let qb = rng.random_range(1..=7);
        let (xs, ys): (Vec<f64>, Vec<f64>) = gold
            .iter()
            .filter_map(|l| match (l[qa - 1].as_binary(), l[qb - 1].as_binary()) {
                (Some(a), Some(b)) => Some((f64::from(a), f64::from(b))),
                _ => None,
            })
            .unzip();
        let got = phi_pair(&ds, qa, qb).map_err(|e| e.to_string())?;
        let sym = phi_pair(&ds, qb, qa).map_err(|e| e.to_string())?;
        ensure(got == sym, || format!("phi({qa},{qb}) != phi({qb},{qa})"))?;
        match (got, pearson(&xs, &ys)) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => undefined += 1,
            (a, b) => return Err(format!("definedness differs: {a:?} vs {b:?}")),
        }
    }
    ensure(worst <= 1e-9, || format!("max |phi - pearson| = {worst:e}"))?;

    let all_yes = dataset_from(&vec![[LabelValue::Yes; 7]; 5]);
    ensure(phi_pair(&all_yes, 1, 2).unwrap().is_none(), || "zero marginal not undefined".into())?;
    let hand = PairCounts { n11: 2, n10: 1, n01: 1, n00: 2 };
    ensure(hand.phi() == Some(1.0 / 3.0), || format!("hand case gave {:?}", hand.phi()))?;
    // same table via records
    let mut rows = Vec::new();
    for (a, b, k) in [(true, true, 2), (true, false, 1), (false, true, 1), (false, false, 2)] {
        for _ in 0..k {
            let mut l = [LabelValue::Nan; 7];
            l[0] = LabelValue::from_bool(a);
            l[1] = LabelValue::from_bool(b);
            rows.push(l);
        }
    }
    let ds = dataset_from(&rows);
    ensure(pair_counts(&ds, 1, 2).unwrap() == hand, || "pair counts wrong".into())?;
    ensure(phi_pair(&ds, 1, 2).unwrap() == Some(1.0 / 3.0), || "record route not 1/3".into())?;
    Ok(format!(
        "max abs diff {worst:.2e} over 1000 fixtures ({undefined} undefined on both routes); (2,1,1,2) -> 1/3 exactly"
    ))
}

// ---------------------------------------------------------------------------
// 6. desk-scale end to end

fn ac6_end_to_end() -> Outcome {
    let (train_set, dev, test) = synthetic::generate(&SyntheticConfig::default());
    ensure(
        (train_set.len(), dev.len(), test.len()) == (600, 60, 120),
        || "unexpected split sizes".into(),
    )?;
    let registry = Registry::default();
    let seeds = [11u64, 22, 33];
    let checkpoints = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let (registry, train_set, dev) = (&registry, &train_set, &dev);
                s.spawn(move || {
                    let cfg = TrainConfig { seed, ..TrainConfig::default() };
                    let enc = registry.create(TOY_ID, seed)?;
                    train(enc, &cfg, train_set, dev)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })
    .map_err(|e| e.to_string())?;

    let defaults = TrainConfig::default();
    for c in &checkpoints {
        let cfg = &c.meta.config;
        ensure(
            cfg.epochs == 15
                && cfg.batch_size == 16
                && cfg.learning_rate == 3e-5
                && cfg.weight_decay == 0.01
                && cfg.dropout == 0.5
                && cfg.max_seq_len == defaults.max_seq_len,
            || "checkpoint not trained with the published defaults".into(),
        )?;
    }
    let scores: Vec<ScoreMatrix> = checkpoints
        .iter()
        .map(|c| c.predict(&test))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let names = seeds.iter().map(|s| format!("toy-seed{s}")).collect();
    let tensor = ScoreTensor::stack(names, &scores).map_err(|e| e.to_string())?;
    let votes = majority_vote(&tensor, &VoteConfig::default()).map_err(|e| e.to_string())?;
    let ensemble_f1 = full_report(&votes, &test).unwrap().mean_f1.unwrap();
    let majority = majority_baseline(&train_set, &test).map_err(|e| e.to_string())?;
    let majority_f1 = full_report(&majority, &test).unwrap().mean_f1.unwrap();
    let singles: Vec<String> = scores
        .iter()
        .map(|s| {
            let l = infodemic::binarize(s, 0.5);
            format!("{:.3}", full_report(&l, &test).unwrap().mean_f1.unwrap())
        })
        .collect();
    let dev_metrics: Vec<String> = checkpoints
        .iter()
        .map(|c| format!("{:.3}@ep{}", c.meta.metric, c.meta.epoch))
        .collect();
    ensure(ensemble_f1 >= 0.90, || format!("ensemble test mean F1 {ensemble_f1:.4} < 0.90"))?;
    ensure(ensemble_f1 > majority_f1, || {
        format!("ensemble {ensemble_f1:.4} does not beat majority baseline {majority_f1:.4}")
    })?;
    Ok(format!(
        "ensemble test mean F1 {ensemble_f1:.4} (members {}, dev {}) vs majority baseline {majority_f1:.4}",
        singles.join("/"),
        dev_metrics.join(", ")
    ))
}

// ---------------------------------------------------------------------------
// 7. full-scale path is documented (not run)

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ac7_documented_full_scale() -> Outcome {
    let config = repo_root().join("configs/paper.toml");
    let text = std::fs::read_to_string(&config).map_err(|e| format!("{}: {e}", config.display()))?;
    let backends = [
        "vinai/bertweet-covid19-base-uncased",
        "digitalepidemiologylab/covid-twitter-bert-v2",
        "cardiffnlp/twitter-roberta-base-hate",
        "cardiffnlp/twitter-roberta-base-emotion",
        "cardiffnlp/twitter-roberta-base-irony",
        "cardiffnlp/twitter-roberta-base-offensive",
    ];
    for b in backends {
        ensure(text.contains(b), || format!("{} lacks backend {b}", config.display()))?;
    }
    let readme = std::fs::read_to_string(repo_root().join("README.md")).map_err(|e| e.to_string())?;
    ensure(readme.contains("configs/paper.toml") && readme.contains("89.7"), || {
        "README does not document the full-scale reproduction".into()
    })?;
    Ok("full-scale config with six encoders documented (expected test mean F1 89.7 +/- 3); excluded from automated runs".into())
}

// ---------------------------------------------------------------------------
// 8. format fidelity

fn ac8_formats() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = SyntheticConfig { train: 120, dev: 30, test: 40, seed: 8, ..Default::default() };
    let (train_set, dev, test) = synthetic::generate(&cfg);
    // shuffle the test order so id order is not trivially sorted
    let mut recs = test.records().to_vec();
    recs.shuffle(&mut ChaCha8Rng::seed_from_u64(8));
    let test = Dataset::new(Split::Test, recs).unwrap();
    let test_path = dir.path().join("test.tsv");
    test.save(&test_path).map_err(|e| e.to_string())?;
    let loaded = corpus::load_dataset(&test_path, Split::Test, true).map_err(|e| e.to_string())?;
    ensure(loaded == test, || "dataset did not round-trip".into())?;

    let registry = Registry::default();
    let mut paths = Vec::new();
    for seed in [1u64, 2] {
        let tc = TrainConfig { seed, epochs: 2, ..TrainConfig::default() };
        let ckpt = train(registry.create(TOY_ID, seed).unwrap(), &tc, &train_set, &dev)
            .map_err(|e| e.to_string())?;
        let scores = ckpt.predict(&loaded).map_err(|e| e.to_string())?;
        let p = dir.path().join(format!("scores{seed}.tsv"));
        scores.save(&p).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&p).unwrap();
        let reread = ScoreMatrix::load(&p).map_err(|e| e.to_string())?;
        ensure(reread.to_tsv().as_bytes() == bytes.as_slice(), || "score file not bit-identical on re-read".into())?;
        ensure(reread.ids() == loaded.ids().as_slice(), || "score file id order differs".into())?;
        paths.push(p);
    }
    let refs: Vec<&Path> = paths.iter().map(|p| p.as_path()).collect();
    let votes = infodemic::ensemble::vote_files(&refs, &VoteConfig::default()).map_err(|e| e.to_string())?;
    let sub = dir.path().join("submission.tsv");
    corpus::write_submission(&sub, &votes).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&sub).unwrap();
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    ensure(ids == test.ids().iter().map(String::as_str).collect::<Vec<_>>(), || {
        "submission id order differs from input".into()
    })?;
    ensure(
        text.lines().skip(1).all(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            cols.len() == 8 && cols[1..].iter().all(|t| *t == "yes" || *t == "no")
        }),
        || "submission contains tokens other than yes/no".into(),
    )?;
    ensure(corpus::read_submission(&sub).unwrap() == votes, || "submission did not re-read".into())?;
    Ok(format!("{} tweets: load -> predict -> vote -> submission keeps id order; score files re-read bit-identically", ids.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 8] = [
        ("AC1 masked loss correctness", ac1_masked_loss, Some(Duration::from_secs(5))),
        ("AC2 gradient check", ac2_gradient_check, Some(Duration::from_secs(30))),
        ("AC3 vote oracle equivalence", ac3_vote_oracle, Some(Duration::from_secs(30))),
        ("AC4 metric oracle equivalence", ac4_metric_oracle, Some(Duration::from_secs(10))),
        ("AC5 phi correctness", ac5_phi, None),
        ("AC6 desk-scale end-to-end", ac6_end_to_end, Some(Duration::from_secs(300))),
        ("AC7 full-scale path documented", ac7_documented_full_scale, None),
        ("AC8 format fidelity", ac8_formats, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
