use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::Dataset;
use crate::ensemble::{check_alignment, LabelMatrix};
use crate::error::{Error, Result};
use crate::NUM_QUESTIONS;

/// Support-weighted precision, recall and F1 over the classes {Yes, No}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuestionMetrics {
    /// Records whose gold label at this question is Yes or No.
    pub support: usize,
    /// `None` when `support` is zero.
    pub scores: Option<Prf>,
}

/// Weighted two-class metrics for aligned hard predictions and gold labels.
///
/// Per class: precision of a never-predicted class is 0, recall of an absent
/// class is 0, F1 is 0 when precision + recall is 0. The class values are
/// averaged with weights equal to the gold class frequencies.
pub fn weighted_prf(pred: &[bool], gold: &[bool]) -> Option<Prf> {
    assert_eq!(pred.len(), gold.len());
    let n = gold.len();
    if n == 0 {
        return None;
    }
    let mut out = Prf {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };
    for class in [true, false] {
        let mut tp = 0usize;
        let mut predicted = 0usize;
        let mut actual = 0usize;
        for (&p, &g) in pred.iter().zip(gold) {
            predicted += usize::from(p == class);
            actual += usize::from(g == class);
            tp += usize::from(p == class && g == class);
        }
        if actual == 0 {
            continue;
        }
        let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
        let recall = tp as f64 / actual as f64;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let w = actual as f64 / n as f64;
        out.precision += w * precision;
        out.recall += w * recall;
        out.f1 += w * f1;
    }
    Some(out)
}

/// Metrics for question `q` (0-based), ignoring records whose gold is Nan.
pub fn question_prf(pred: &LabelMatrix, gold: &Dataset, q: usize) -> Result<QuestionMetrics> {
    if q >= NUM_QUESTIONS {
        return Err(Error::Invalid(format!("question index {q} out of range")));
    }
    check_alignment(&gold.ids(), pred.ids())?;
    let (p, g): (Vec<bool>, Vec<bool>) = pred
        .rows()
        .iter()
        .zip(gold.records())
        .filter_map(|(row, rec)| rec.labels[q].as_binary().map(|y| (row[q], y == 1)))
        .unzip();
    Ok(QuestionMetrics {
        support: g.len(),
        scores: weighted_prf(&p, &g),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub questions: [QuestionMetrics; NUM_QUESTIONS],
    /// Unweighted means over questions with non-zero support; `None` if there are none.
    pub mean_precision: Option<f64>,
    pub mean_recall: Option<f64>,
    pub mean_f1: Option<f64>,
    /// 1-based questions left out of the means for lack of support.
    pub undefined: Vec<usize>,
}

pub fn full_report(pred: &LabelMatrix, gold: &Dataset) -> Result<MetricsReport> {
    let mut questions = [QuestionMetrics {
        support: 0,
        scores: None,
    }; NUM_QUESTIONS];
    for (q, slot) in questions.iter_mut().enumerate() {
        *slot = question_prf(pred, gold, q)?;
    }
    let defined: Vec<Prf> = questions.iter().filter_map(|m| m.scores).collect();
    let undefined: Vec<usize> = questions
        .iter()
        .enumerate()
        .filter(|(_, m)| m.scores.is_none())
        .map(|(q, _)| q + 1)
        .collect();
    if !undefined.is_empty() {
        log::warn!("questions {undefined:?} have no yes/no gold and are excluded from the means");
    }
    let mean = |f: fn(&Prf) -> f64| {
        (!defined.is_empty()).then(|| defined.iter().map(f).sum::<f64>() / defined.len() as f64)
    };
    Ok(MetricsReport {
        questions,
        mean_precision: mean(|p| p.precision),
        mean_recall: mean(|p| p.recall),
        mean_f1: mean(|p| p.f1),
        undefined,
    })
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{:.1}", 100.0 * x))
}

impl MetricsReport {
    /// Tab-separated report, percentages with one decimal.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("question\tprecision\trecall\tf1\tsupport\n");
        for (q, m) in self.questions.iter().enumerate() {
            let _ = writeln!(
                out,
                "q{}\t{}\t{}\t{}\t{}",
                q + 1,
                pct(m.scores.map(|s| s.precision)),
                pct(m.scores.map(|s| s.recall)),
                pct(m.scores.map(|s| s.f1)),
                m.support
            );
        }
        let total: usize = self.questions.iter().map(|m| m.support).sum();
        let _ = writeln!(
            out,
            "mean\t{}\t{}\t{}\t{}",
            pct(self.mean_precision),
            pct(self.mean_recall),
            pct(self.mean_f1),
            total
        );
        out
    }

    /// Aligned table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<9}{:>10}{:>10}{:>10}{:>9}\n", "question", "precision", "recall", "f1", "support");
        for line in self.to_tsv().lines().skip(1) {
            let c: Vec<&str> = line.split('\t').collect();
            let _ = writeln!(out, "{:<9}{:>10}{:>10}{:>10}{:>9}", c[0], c[1], c[2], c[3], c[4]);
        }
        out
    }
}
