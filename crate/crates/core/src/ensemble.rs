//! Rounding and majority-rule aggregation of per-model scores.

use std::path::Path;
use std::str::FromStr;

use ndarray::{Array3, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modeling::ScoreMatrix;
use crate::NUM_QUESTIONS;

/// Hard yes/no decisions, one row per tweet. `true` means Yes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    ids: Vec<String>,
    rows: Vec<[bool; NUM_QUESTIONS]>,
}

impl LabelMatrix {
    pub fn new(ids: Vec<String>, rows: Vec<[bool; NUM_QUESTIONS]>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::Shape(format!(
                "{} ids but {} label rows",
                ids.len(),
                rows.len()
            )));
        }
        Ok(LabelMatrix { ids, rows })
    }

    /// A matrix that answers `column[q]` for every tweet.
    pub fn constant(ids: Vec<String>, column: [bool; NUM_QUESTIONS]) -> Self {
        let rows = vec![column; ids.len()];
        LabelMatrix { ids, rows }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[[bool; NUM_QUESTIONS]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, row: usize, question: usize) -> bool {
        self.rows[row][question]
    }
}

/// What to emit when a vote splits evenly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Yes iff the mean of the raw scores reaches the threshold.
    #[default]
    MeanScore,
    AlwaysYes,
    AlwaysNo,
}

impl FromStr for TieRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mean-score" => Ok(TieRule::MeanScore),
            "always-yes" => Ok(TieRule::AlwaysYes),
            "always-no" => Ok(TieRule::AlwaysNo),
            _ => Err(format!(
                "unknown tie rule `{s}` (expected mean-score, always-yes or always-no)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoteConfig {
    pub threshold: f64,
    pub tie_rule: TieRule,
}

impl Default for VoteConfig {
    fn default() -> Self {
        VoteConfig {
            threshold: 0.5,
            tie_rule: TieRule::MeanScore,
        }
    }
}

impl VoteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Invalid(format!(
                "vote threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Scores of `m` models over the same `n` tweets: shape `(m, n, 7)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTensor {
    model_ids: Vec<String>,
    ids: Vec<String>,
    values: Array3<f64>,
}

impl ScoreTensor {
    /// Stacks per-model score matrices, requiring identical tweet-id order.
    pub fn stack(model_ids: Vec<String>, matrices: &[ScoreMatrix]) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Invalid("an ensemble needs at least one model".into()));
        }
        if model_ids.len() != matrices.len() {
            return Err(Error::Shape(format!(
                "{} model ids for {} score matrices",
                model_ids.len(),
                matrices.len()
            )));
        }
        let ids = matrices[0].ids().to_vec();
        let n = ids.len();
        for m in &matrices[1..] {
            check_alignment(&ids, m.ids())?;
        }
        let mut values = Array3::zeros((matrices.len(), n, NUM_QUESTIONS));
        for (k, m) in matrices.iter().enumerate() {
            values
                .index_axis_mut(ndarray::Axis(0), k)
                .assign(m.values());
        }
        Self::from_array(model_ids, ids, values)
    }

    pub fn from_array(model_ids: Vec<String>, ids: Vec<String>, values: Array3<f64>) -> Result<Self> {
        let (m, n, q) = values.dim();
        if m == 0 {
            return Err(Error::Invalid("an ensemble needs at least one model".into()));
        }
        if m != model_ids.len() || n != ids.len() || q != NUM_QUESTIONS {
            return Err(Error::Shape(format!(
                "score tensor {:?} does not match {} models x {} tweets x {NUM_QUESTIONS}",
                values.dim(),
                model_ids.len(),
                ids.len()
            )));
        }
        if let Some(bad) = values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Invalid(format!("score {bad} outside [0, 1]")));
        }
        Ok(ScoreTensor {
            model_ids,
            ids,
            values,
        })
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn num_models(&self) -> usize {
        self.values.dim().0
    }
}

/// Fails with the first row whose id differs.
pub fn check_alignment(expected: &[String], found: &[String]) -> Result<()> {
    for (row, (e, f)) in expected.iter().zip(found).enumerate() {
        if e != f {
            return Err(Error::Alignment {
                row: row + 1,
                expected: e.clone(),
                found: f.clone(),
            });
        }
    }
    if expected.len() != found.len() {
        let row = expected.len().min(found.len()) + 1;
        let show = |v: &[String]| v.get(row - 1).cloned().unwrap_or_else(|| "<end>".into());
        return Err(Error::Alignment {
            row,
            expected: show(expected),
            found: show(found),
        });
    }
    Ok(())
}

fn binarize_view(values: ArrayView2<f64>, threshold: f64) -> Vec<[bool; NUM_QUESTIONS]> {
    values
        .outer_iter()
        .map(|row| {
            let mut out = [false; NUM_QUESTIONS];
            for (o, &s) in out.iter_mut().zip(row.iter()) {
                *o = s >= threshold;
            }
            out
        })
        .collect()
}

/// Yes iff `score >= threshold`.
pub fn binarize(scores: &ScoreMatrix, threshold: f64) -> LabelMatrix {
    LabelMatrix {
        ids: scores.ids().to_vec(),
        rows: binarize_view(scores.values().view(), threshold),
    }
}

/// Counters collected while voting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VoteStats {
    /// Cells where Yes and No votes were equal and the tie rule decided.
    pub ties: usize,
}

pub fn majority_vote(tensor: &ScoreTensor, config: &VoteConfig) -> Result<LabelMatrix> {
    majority_vote_with_stats(tensor, config).map(|(labels, _)| labels)
}

/// Rounds every model's score at `config.threshold` and takes the majority per
/// cell; even splits go to `config.tie_rule`.
pub fn majority_vote_with_stats(
    tensor: &ScoreTensor,
    config: &VoteConfig,
) -> Result<(LabelMatrix, VoteStats)> {
    config.validate()?;
    let (m, n, _) = tensor.values.dim();
    if m == 0 {
        return Err(Error::Invalid("an ensemble needs at least one model".into()));
    }
    let mut stats = VoteStats::default();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = [false; NUM_QUESTIONS];
        for (q, cell) in row.iter_mut().enumerate() {
            let votes = tensor.values.slice(ndarray::s![.., i, q]);
            let yes = votes.iter().filter(|&&s| s >= config.threshold).count();
            let no = m - yes;
            *cell = if yes != no {
                yes > no
            } else {
                stats.ties += 1;
                match config.tie_rule {
                    TieRule::MeanScore => votes.sum() / m as f64 >= config.threshold,
                    TieRule::AlwaysYes => true,
                    TieRule::AlwaysNo => false,
                }
            };
        }
        rows.push(row);
    }
    Ok((
        LabelMatrix {
            ids: tensor.ids.clone(),
            rows,
        },
        stats,
    ))
}

/// Reads score files, checks id alignment and votes.
pub fn vote_files(paths: &[&Path], config: &VoteConfig) -> Result<LabelMatrix> {
    let matrices = paths
        .iter()
        .map(|p| ScoreMatrix::load(p))
        .collect::<Result<Vec<_>>>()?;
    let names = paths.iter().map(|p| p.display().to_string()).collect();
    let tensor = ScoreTensor::stack(names, &matrices)?;
    majority_vote(&tensor, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array, Array2};
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    fn single_cell(scores: &[f64], rule: TieRule) -> bool {
        let m = scores.len();
        let mut v = Array3::zeros((m, 1, NUM_QUESTIONS));
        for (k, &s) in scores.iter().enumerate() {
            v[[k, 0, 3]] = s;
        }
        let t = ScoreTensor::from_array(ids(m), ids(1), v).unwrap();
        let cfg = VoteConfig {
            threshold: 0.5,
            tie_rule: rule,
        };
        majority_vote(&t, &cfg).unwrap().get(0, 3)
    }

    #[test]
    fn boundary_is_yes() {
        let s = ScoreMatrix::new(ids(1), Array2::from_elem((1, 7), 0.5)).unwrap();
        assert!(binarize(&s, 0.5).rows()[0].iter().all(|&b| b));
        let z = ScoreMatrix::new(ids(3), Array2::zeros((3, 7))).unwrap();
        assert!(binarize(&z, 0.5).rows().iter().flatten().all(|&b| !b));
    }

    #[test]
    fn hand_votes() {
        assert!(single_cell(&[0.9, 0.8, 0.1], TieRule::MeanScore));
        assert!(!single_cell(&[0.9, 0.2, 0.1], TieRule::AlwaysYes));
        let six = [0.9, 0.9, 0.9, 0.1, 0.1, 0.1];
        assert!(single_cell(&six, TieRule::MeanScore));
        assert!(single_cell(&six, TieRule::AlwaysYes));
        assert!(!single_cell(&six, TieRule::AlwaysNo));
        assert!(!single_cell(&[0.9, 0.9, 0.9, 0.1, 0.1, 0.05], TieRule::MeanScore));
    }

    #[test]
    fn empty_ensemble_rejected() {
        let v = Array3::<f64>::zeros((0, 2, 7));
        assert!(ScoreTensor::from_array(vec![], ids(2), v).is_err());
        assert!(ScoreTensor::stack(vec![], &[]).is_err());
    }

    #[test]
    fn misaligned_ids_report_first_row() {
        let a = ScoreMatrix::new(ids(3), Array2::zeros((3, 7))).unwrap();
        let b = ScoreMatrix::new(
            vec!["t0".into(), "x".into(), "t2".into()],
            Array2::zeros((3, 7)),
        )
        .unwrap();
        match ScoreTensor::stack(vec!["a".into(), "b".into()], &[a, b]).unwrap_err() {
            Error::Alignment { row, .. } => assert_eq!(row, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn threshold_validated() {
        let t = ScoreTensor::from_array(ids(1), ids(1), Array3::zeros((1, 1, 7))).unwrap();
        let cfg = VoteConfig {
            threshold: 1.0,
            ..Default::default()
        };
        assert!(majority_vote(&t, &cfg).is_err());
    }

    #[test]
    fn binarize_matches_elementwise_loop() {
        let v = array![
            [0.1, 0.5, 0.49, 0.51, 0.9, 0.0, 1.0],
            [0.7, 0.3, 0.5, 0.2, 0.6, 0.4, 0.55],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.99, 0.01, 0.5, 0.5, 0.25, 0.75, 0.5]
        ];
        let s = ScoreMatrix::new(ids(4), v.clone()).unwrap();
        let b = binarize(&s, 0.5);
        for i in 0..4 {
            for q in 0..7 {
                assert_eq!(b.get(i, q), v[[i, q]] >= 0.5);
            }
        }
    }

    fn tensor_strategy(m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ScoreTensor> {
        (m, 1usize..6).prop_flat_map(|(m, n)| {
            prop::collection::vec(0.0f64..=1.0, m * n * NUM_QUESTIONS).prop_map(move |v| {
                let a = Array::from_shape_vec((m, n, NUM_QUESTIONS), v).unwrap();
                ScoreTensor::from_array(ids(m), ids(n), a).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn single_model_equals_binarize(t in tensor_strategy(1..=1), th in 0.05f64..0.95) {
            let cfg = VoteConfig { threshold: th, tie_rule: TieRule::MeanScore };
            let sm = ScoreMatrix::new(t.ids().to_vec(), t.values().index_axis(ndarray::Axis(0), 0).to_owned()).unwrap();
            prop_assert_eq!(majority_vote(&t, &cfg).unwrap(), binarize(&sm, th));
        }

        #[test]
        fn odd_ensembles_never_tie(t in tensor_strategy(1..=7)) {
            let (_, stats) = majority_vote_with_stats(&t, &VoteConfig::default()).unwrap();
            if t.num_models() % 2 == 1 {
                prop_assert_eq!(stats.ties, 0);
            }
        }

        #[test]
        fn raising_one_score_never_turns_yes_to_no(
            t in tensor_strategy(1..=6), k in 0usize..6, i in 0usize..6, q in 0usize..7,
        ) {
            let (m, n, _) = t.values().dim();
            let (k, i) = (k % m, i % n);
            let cfg = VoteConfig::default();
            let before = majority_vote(&t, &cfg).unwrap();
            let mut v = t.values().clone();
            v[[k, i, q]] = 1.0;
            let raised = ScoreTensor::from_array(t.model_ids().to_vec(), t.ids().to_vec(), v).unwrap();
            let after = majority_vote(&raised, &cfg).unwrap();
            prop_assert!(!before.get(i, q) || after.get(i, q));
        }
    }
}
