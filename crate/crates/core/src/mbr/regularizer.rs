//! Quality and uncertainty regularizers.
//!
//! Every value is oriented so that higher means better: log-probabilities are
//! used as-is, uncertainty measures are negated.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::candidate::{Candidate, NBestList};
use crate::config::Regularizer;
use crate::error::{Error, Result};

// Running mean; exact when all values are equal, whatever their count.
fn mean(values: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .fold(0.0, |acc, (k, v)| acc + (v - acc) / (k + 1) as f64)
}

/// Value of `reg` for one candidate; `index` is only used for error messages.
pub(crate) fn regularizer_value(candidate: &Candidate, index: usize, reg: Regularizer) -> Result<f64> {
    let missing = || Error::MissingScore {
        candidate: index,
        regularizer: reg.name(),
        field: reg.source_field().to_string(),
    };
    match reg {
        Regularizer::Lp => Ok(candidate.log_prob()),
        Regularizer::Lm | Regularizer::Bt | Regularizer::Qe => {
            candidate.external_score(reg.name()).ok_or_else(missing)
        }
        Regularizer::McDropout => candidate.mc_pass_scores().map(|s| -mean(s)).ok_or_else(missing),
        Regularizer::Entropy => candidate.token_entropies().map(|s| -mean(s)).ok_or_else(missing),
    }
}

/// Scores every candidate of `list` under `reg`.
pub fn regularizer_values(list: &NBestList, reg: Regularizer) -> Result<Vec<f64>> {
    list.candidates()
        .iter()
        .enumerate()
        .map(|(i, c)| regularizer_value(c, i, reg))
        .collect()
}

/// Shannon entropy `-Σ p ln p` (nats) of one next-token distribution.
pub fn token_entropy(dist: &[f64]) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::InvalidInput("empty distribution".into()));
    }
    if let Some(p) = dist.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidInput(format!("invalid probability {p}")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("distribution sums to {total}, not 1")));
    }
    let h: f64 = dist
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * libm::log(*p))
        .sum();
    // keep rounding noise inside the exact bounds 0 <= H <= ln |d|
    Ok(h.clamp(0.0, libm::log(dist.len() as f64)))
}
