//! Categorical distributions over logits with an action mask. Masked
//! actions get probability exactly zero, in sampling and in log-probs.

use crate::pddl::ActionMask;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("every action is masked")]
    AllMasked,
    #[error("mask has {mask} bits but the policy has {logits} actions")]
    SizeMismatch { mask: usize, logits: usize },
}

/// Probabilities of a masked softmax.
pub fn masked_probs(logits: &[f64], mask: &ActionMask) -> Result<Vec<f64>, DistError> {
    if mask.len() != logits.len() {
        return Err(DistError::SizeMismatch {
            mask: mask.len(),
            logits: logits.len(),
        });
    }
    let max = logits
        .iter()
        .enumerate()
        .filter(|(i, _)| mask.is_set(*i))
        .map(|(_, &l)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(DistError::AllMasked);
    }
    let mut p: Vec<f64> = logits
        .iter()
        .enumerate()
        .map(|(i, &l)| if mask.is_set(i) { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    Ok(p)
}

/// Log-probabilities of a masked softmax; masked entries are `-inf`.
pub fn masked_log_probs(logits: &[f64], mask: &ActionMask) -> Result<Vec<f64>, DistError> {
    let p = masked_probs(logits, mask)?;
    let unmasked = || {
        logits
            .iter()
            .enumerate()
            .filter(|(i, _)| mask.is_set(*i))
            .map(|(_, &l)| l)
    };
    let max = unmasked().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + unmasked().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok(p.iter()
        .zip(logits)
        .map(|(&pi, &l)| if pi > 0.0 { l - lse } else { f64::NEG_INFINITY })
        .collect())
}

/// Entropy of a distribution given as probabilities.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// Draws an action, or the most likely unmasked one when `explore` is off.
pub fn select_action<R: Rng + ?Sized>(
    logits: &[f64],
    mask: &ActionMask,
    explore: bool,
    rng: &mut R,
) -> Result<usize, DistError> {
    let p = masked_probs(logits, mask)?;
    if !explore {
        let mut best = None;
        for (i, &l) in logits.iter().enumerate() {
            if mask.is_set(i) && best.is_none_or(|b: usize| l > logits[b]) {
                best = Some(i);
            }
        }
        return best.ok_or(DistError::AllMasked);
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            acc += pi;
            last = i;
            if u < acc {
                return Ok(i);
            }
        }
    }
    Ok(last)
}
