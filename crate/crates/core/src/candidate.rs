//! Candidates and n-best lists.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One hypothesis of an n-best list.
///
/// Construction validates the per-token arrays against the token count, so a
/// `Candidate` that exists is always internally consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    text: String,
    tokens: Vec<String>,
    log_prob: f64,
    token_log_probs: Option<Vec<f64>>,
    external_scores: BTreeMap<String, f64>,
    mc_pass_scores: Option<Vec<f64>>,
    token_entropies: Option<Vec<f64>>,
}

impl Candidate {
    pub fn new(text: impl Into<String>, tokens: Vec<String>, log_prob: f64) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput("candidate has no tokens".into()));
        }
        if log_prob.is_nan() || log_prob > 0.0 || log_prob.is_infinite() {
            return Err(Error::InvalidInput(format!(
                "log_prob must be a finite value <= 0, got {log_prob}"
            )));
        }
        Ok(Candidate {
            text: text.into(),
            tokens,
            log_prob,
            token_log_probs: None,
            external_scores: BTreeMap::new(),
            mc_pass_scores: None,
            token_entropies: None,
        })
    }

    /// Builds a candidate whose tokens are the whitespace-separated words of `text`.
    pub fn from_text(text: &str, log_prob: f64) -> Result<Self> {
        let tokens = text.split_whitespace().map(ToString::to_string).collect();
        Candidate::new(text, tokens, log_prob)
    }

    pub fn with_token_log_probs(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.tokens.len() {
            return Err(Error::InvalidInput(format!(
                "token_log_probs has {} entries for {} tokens",
                values.len(),
                self.tokens.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v <= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "token_log_probs entries must be finite and <= 0, got {v}"
            )));
        }
        self.token_log_probs = Some(values);
        Ok(self)
    }

    pub fn with_external_score(mut self, name: impl Into<String>, value: f64) -> Result<Self> {
        let name = name.into();
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!("external score `{name}` is not finite")));
        }
        self.external_scores.insert(name, value);
        Ok(self)
    }

    /// Per-pass values of the negative log-probability under dropout.
    pub fn with_mc_pass_scores(mut self, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("mc_pass_scores is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("mc_pass_scores contains a non-finite value".into()));
        }
        self.mc_pass_scores = Some(values);
        Ok(self)
    }

    pub fn with_token_entropies(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.tokens.len() {
            return Err(Error::InvalidInput(format!(
                "token_entropies has {} entries for {} tokens",
                values.len(),
                self.tokens.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "token_entropies entries must be finite and >= 0, got {v}"
            )));
        }
        self.token_entropies = Some(values);
        Ok(self)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn log_prob(&self) -> f64 {
        self.log_prob
    }

    pub fn token_log_probs(&self) -> Option<&[f64]> {
        self.token_log_probs.as_deref()
    }

    pub fn external_scores(&self) -> &BTreeMap<String, f64> {
        &self.external_scores
    }

    pub fn external_score(&self, name: &str) -> Option<f64> {
        self.external_scores.get(name).copied()
    }

    pub fn mc_pass_scores(&self) -> Option<&[f64]> {
        self.mc_pass_scores.as_deref()
    }

    pub fn token_entropies(&self) -> Option<&[f64]> {
        self.token_entropies.as_deref()
    }
}

/// A source sentence with its candidates in beam order (descending log-probability).
#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    source: String,
    reference: Option<String>,
    reference_token_log_probs: Option<Vec<f64>>,
    candidates: Vec<Candidate>,
}

impl NBestList {
    /// Fails unless `candidates` is non-empty and already sorted by
    /// descending log-probability.
    pub fn new(
        source: impl Into<String>,
        reference: Option<String>,
        candidates: Vec<Candidate>,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidInput("n-best list has no candidates".into()));
        }
        if let Some(pos) = first_order_violation(&candidates) {
            return Err(Error::InvalidInput(format!(
                "candidates not in beam order: candidate {} has higher log_prob than candidate {}",
                pos + 1,
                pos
            )));
        }
        Ok(NBestList {
            source: source.into(),
            reference,
            reference_token_log_probs: None,
            candidates,
        })
    }

    /// Like [`NBestList::new`] but stable-sorts the candidates into beam order
    /// instead of rejecting them. The flag tells whether a re-sort happened.
    pub fn from_unsorted(
        source: impl Into<String>,
        reference: Option<String>,
        mut candidates: Vec<Candidate>,
    ) -> Result<(Self, bool)> {
        let resorted = first_order_violation(&candidates).is_some();
        if resorted {
            // log_prob is never NaN, so total_cmp agrees with the numeric order
            candidates.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
        }
        Ok((NBestList::new(source, reference, candidates)?, resorted))
    }

    /// Attaches model log-probabilities of the reference tokens (force-decoded).
    pub fn with_reference_token_log_probs(mut self, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("reference_token_log_probs is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v <= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "reference_token_log_probs entries must be finite and <= 0, got {v}"
            )));
        }
        self.reference_token_log_probs = Some(values);
        Ok(self)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn reference(&self) -> Option<&str> {
        self.reference.as_deref()
    }

    pub fn reference_token_log_probs(&self) -> Option<&[f64]> {
        self.reference_token_log_probs.as_deref()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate(&self, index: usize) -> &Candidate {
        &self.candidates[index]
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

fn first_order_violation(candidates: &[Candidate]) -> Option<usize> {
    candidates
        .windows(2)
        .position(|w| w[1].log_prob > w[0].log_prob)
}
