//! Dataset statistics: per-question label counts and pairwise φ coefficients.

mod charts;

use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{Dataset, LabelValue};
use crate::error::{Error, Result};
use crate::NUM_QUESTIONS;

pub use charts::{render_charts, ChartFiles};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LabelCounts {
    pub yes: usize,
    pub no: usize,
    pub nan: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.yes + self.no + self.nan
    }
}

/// Label counts per question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionTable {
    pub questions: [LabelCounts; NUM_QUESTIONS],
}

impl DistributionTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("question\tyes\tno\tnan\n");
        for (q, c) in self.questions.iter().enumerate() {
            let _ = writeln!(out, "q{}\t{}\t{}\t{}", q + 1, c.yes, c.no, c.nan);
        }
        out
    }
}

pub fn label_distribution(dataset: &Dataset) -> DistributionTable {
    let mut questions = [LabelCounts::default(); NUM_QUESTIONS];
    for r in dataset.records() {
        for (c, l) in questions.iter_mut().zip(r.labels) {
            match l {
                LabelValue::Yes => c.yes += 1,
                LabelValue::No => c.no += 1,
                LabelValue::Nan => c.nan += 1,
            }
        }
    }
    DistributionTable { questions }
}

/// 2x2 contingency counts over records where both questions are answered.
/// `n10` counts Yes on the first question and No on the second.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub n11: usize,
    pub n10: usize,
    pub n01: usize,
    pub n00: usize,
}

impl PairCounts {
    pub fn total(&self) -> usize {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    /// `(n11 n00 - n10 n01) / sqrt(r1 r0 c1 c0)`, `None` if any marginal is zero.
    pub fn phi(&self) -> Option<f64> {
        let r1 = (self.n11 + self.n10) as f64;
        let r0 = (self.n01 + self.n00) as f64;
        let c1 = (self.n11 + self.n01) as f64;
        let c0 = (self.n10 + self.n00) as f64;
        let denom = r1 * r0 * c1 * c0;
        if denom == 0.0 {
            return None;
        }
        let num = (self.n11 * self.n00) as f64 - (self.n10 * self.n01) as f64;
        Some((num / denom.sqrt()).clamp(-1.0, 1.0))
    }
}

fn check_question(q: usize) -> Result<()> {
    if !(1..=NUM_QUESTIONS).contains(&q) {
        return Err(Error::Invalid(format!("question number {q} outside 1..=7")));
    }
    Ok(())
}

/// Contingency counts for questions `qa`, `qb` (1-based), skipping Nan.
pub fn pair_counts(dataset: &Dataset, qa: usize, qb: usize) -> Result<PairCounts> {
    check_question(qa)?;
    check_question(qb)?;
    let mut c = PairCounts::default();
    for r in dataset.records() {
        match (r.labels[qa - 1].as_binary(), r.labels[qb - 1].as_binary()) {
            (Some(1), Some(1)) => c.n11 += 1,
            (Some(1), Some(_)) => c.n10 += 1,
            (Some(_), Some(1)) => c.n01 += 1,
            (Some(_), Some(_)) => c.n00 += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// φ between questions `qa` and `qb` (1-based) with Yes=1, No=0 on records
/// where neither is Nan. `None` means undefined (a zero marginal).
pub fn phi_pair(dataset: &Dataset, qa: usize, qb: usize) -> Result<Option<f64>> {
    Ok(pair_counts(dataset, qa, qb)?.phi())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    /// `values[a][b]` for 0-based questions.
    pub values: [[Option<f64>; NUM_QUESTIONS]; NUM_QUESTIONS],
    pub n_pair: [[usize; NUM_QUESTIONS]; NUM_QUESTIONS],
}

impl PhiMatrix {
    pub fn get(&self, qa: usize, qb: usize) -> Option<f64> {
        self.values[qa - 1][qb - 1]
    }

    /// One row per ordered pair; undefined entries read `undefined`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("qa\tqb\tphi\tn_pair\n");
        for a in 0..NUM_QUESTIONS {
            for b in 0..NUM_QUESTIONS {
                let phi = self.values[a][b].map_or_else(|| "undefined".to_string(), |v| v.to_string());
                let _ = writeln!(out, "q{}\tq{}\t{}\t{}", a + 1, b + 1, phi, self.n_pair[a][b]);
            }
        }
        out
    }
}

pub fn phi_matrix(dataset: &Dataset) -> PhiMatrix {
    let mut values = [[None; NUM_QUESTIONS]; NUM_QUESTIONS];
    let mut n_pair = [[0; NUM_QUESTIONS]; NUM_QUESTIONS];
    for a in 0..NUM_QUESTIONS {
        for b in a..NUM_QUESTIONS {
            let c = pair_counts(dataset, a + 1, b + 1).expect("indices in range");
            values[a][b] = c.phi();
            values[b][a] = values[a][b];
            n_pair[a][b] = c.total();
            n_pair[b][a] = n_pair[a][b];
        }
    }
    PhiMatrix { values, n_pair }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabeledTweet, Split};
    use LabelValue::{Nan, No, Yes};

    fn ds(rows: &[[LabelValue; 7]]) -> Dataset {
        Dataset::new(
            Split::Custom,
            rows.iter()
                .enumerate()
                .map(|(i, l)| LabeledTweet::new(format!("{i}"), "x", *l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_distribution() {
        let t = label_distribution(&ds(&[]));
        assert!(t.questions.iter().all(|c| c.total() == 0));
    }

    #[test]
    fn hand_tallied_distribution() {
        let t = label_distribution(&ds(&[
            [Yes, No, Nan, Yes, Yes, No, No],
            [Yes, Nan, Nan, No, Yes, No, Yes],
            [No, Nan, Nan, Nan, Yes, No, No],
            [Yes, Yes, No, Nan, Yes, Yes, No],
        ]));
        assert_eq!(t.questions[0], LabelCounts { yes: 3, no: 1, nan: 0 });
        assert_eq!(t.questions[1], LabelCounts { yes: 1, no: 1, nan: 2 });
        assert_eq!(t.questions[2], LabelCounts { yes: 0, no: 1, nan: 3 });
        assert_eq!(t.questions[3], LabelCounts { yes: 1, no: 1, nan: 2 });
        assert_eq!(t.questions[4], LabelCounts { yes: 4, no: 0, nan: 0 });
        assert_eq!(t.questions[5], LabelCounts { yes: 1, no: 3, nan: 0 });
        assert_eq!(t.questions[6], LabelCounts { yes: 1, no: 3, nan: 0 });
    }

    #[test]
    fn phi_hand_case_is_one_third() {
        let c = PairCounts { n11: 2, n10: 1, n01: 1, n00: 2 };
        assert_eq!(c.phi(), Some(1.0 / 3.0));
    }

    #[test]
    fn phi_identical_and_degenerate() {
        let d = ds(&[
            [Yes, Yes, Yes, No, Nan, Yes, Yes],
            [No, No, Yes, No, Yes, Yes, No],
            [Yes, Yes, Yes, Nan, No, Yes, Yes],
        ]);
        assert_eq!(phi_pair(&d, 1, 2).unwrap(), Some(1.0));
        assert_eq!(phi_pair(&d, 1, 7).unwrap(), Some(1.0));
        assert_eq!(phi_pair(&d, 1, 3).unwrap(), None);
        assert_eq!(phi_pair(&d, 4, 4).unwrap(), None);
        assert!(phi_pair(&d, 0, 3).is_err());
        assert!(phi_pair(&d, 1, 8).is_err());
        let m = phi_matrix(&d);
        assert_eq!(m.get(1, 1), Some(1.0));
        assert_eq!(m.n_pair[0][4], 2);
        assert!(m.to_tsv().contains("q1\tq3\tundefined\t3\n"));
    }
}
