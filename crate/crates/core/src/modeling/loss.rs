//! Binary cross-entropy with nan-gold cells masked out.
//!
//! The loss is the mean over every (example, question) cell whose gold label
//! is Yes or No; Nan cells contribute neither loss nor gradient. A batch with
//! no labelled cell has loss 0 and a zero gradient.

use ndarray::{Array2, ArrayView2};

use crate::corpus::Labels;
use crate::error::{Error, Result};
use crate::NUM_QUESTIONS;

fn check_shape(rows: usize, cols: usize, gold: &[Labels]) -> Result<()> {
    if rows != gold.len() || cols != NUM_QUESTIONS {
        return Err(Error::Shape(format!(
            "scores are {rows}x{cols} but gold has {} rows of {NUM_QUESTIONS}",
            gold.len()
        )));
    }
    Ok(())
}

/// Masked BCE on probabilities in (0, 1).
pub fn masked_bce(scores: ArrayView2<f64>, gold: &[Labels]) -> Result<f64> {
    let (rows, cols) = scores.dim();
    check_shape(rows, cols, gold)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for (row, labels) in scores.outer_iter().zip(gold) {
        for (&s, label) in row.iter().zip(labels) {
            let Some(y) = label.as_binary() else { continue };
            total -= if y == 1 { s.ln() } else { (1.0 - s).ln() };
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

/// Masked BCE on pre-sigmoid logits together with its gradient
/// `d loss / d logits`. Numerically stable for large |logit|.
pub fn masked_bce_with_logits(
    logits: ArrayView2<f64>,
    gold: &[Labels],
) -> Result<(f64, Array2<f64>)> {
    let (rows, cols) = logits.dim();
    check_shape(rows, cols, gold)?;
    let count = gold.iter().flatten().filter(|l| !l.is_nan()).count();
    let mut grad = Array2::zeros((rows, cols));
    if count == 0 {
        return Ok((0.0, grad));
    }
    let scale = 1.0 / count as f64;
    let mut total = 0.0;
    for ((i, q), &z) in logits.indexed_iter() {
        let Some(y) = gold[i][q].as_binary() else { continue };
        let y = f64::from(y);
        // softplus(z) - y z  ==  -[y log s + (1-y) log(1-s)]
        total += softplus(z) - y * z;
        grad[[i, q]] = (sigmoid(z) - y) * scale;
    }
    Ok((total * scale, grad))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}
