//! Reranking configuration.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::score::TieBreak;

/// Per-candidate scores that can be added to the MBR score.
///
/// The first four are quality scores, the last two model-uncertainty scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regularizer {
    /// Sentence log-probability of the translation model.
    Lp,
    /// Target language model log-probability (`external_scores["lm"]`).
    Lm,
    /// Backward translation log-probability (`external_scores["bt"]`).
    Bt,
    /// Quality estimation score (`external_scores["qe"]`).
    Qe,
    /// Negated mean of the per-pass dropout negative log-probabilities.
    McDropout,
    /// Negated mean per-token entropy.
    Entropy,
}

impl Regularizer {
    pub const ALL: [Regularizer; 6] = [
        Regularizer::Lp,
        Regularizer::Lm,
        Regularizer::Bt,
        Regularizer::Qe,
        Regularizer::McDropout,
        Regularizer::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regularizer::Lp => "lp",
            Regularizer::Lm => "lm",
            Regularizer::Bt => "bt",
            Regularizer::Qe => "qe",
            Regularizer::McDropout => "mc_dropout",
            Regularizer::Entropy => "entropy",
        }
    }

    /// Name of the candidate field this regularizer reads.
    pub fn source_field(self) -> &'static str {
        match self {
            Regularizer::Lp => "log_prob",
            Regularizer::Lm => "external_scores.lm",
            Regularizer::Bt => "external_scores.bt",
            Regularizer::Qe => "external_scores.qe",
            Regularizer::McDropout => "mc_pass_scores",
            Regularizer::Entropy => "token_entropies",
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regularizer::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown regularizer `{s}` (expected one of lp, lm, bt, qe, mc_dropout, entropy)"
                ))
            })
    }
}

/// How many leading candidates act as pseudo-references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Every candidate (`l = n`).
    #[default]
    Full,
    /// The first `l` candidates in beam order, capped at `n`.
    Top(usize),
}

impl Truncation {
    /// Effective `l` for a list of `n` candidates.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Truncation::Full => n,
            Truncation::Top(l) => l.min(n),
        }
    }
}

impl FromStr for Truncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(Truncation::Full);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::Config(format!(
                "l must be a positive integer or `full`, got `{s}`"
            ))),
            Ok(l) => Ok(Truncation::Top(l)),
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Full => f.write_str("full"),
            Truncation::Top(l) => write!(f, "{l}"),
        }
    }
}

/// Where utility values come from. Only the builtin variants are evaluated
/// in this crate; the others are resolved by the IO layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UtilitySpec {
    Bleu,
    Chrf,
    Matrix(String),
    Service(String),
}

impl FromStr for UtilitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bleu" => return Ok(UtilitySpec::Bleu),
            "chrf" => return Ok(UtilitySpec::Chrf),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("matrix:").filter(|p| !p.is_empty()) {
            return Ok(UtilitySpec::Matrix(path.to_string()));
        }
        if let Some(addr) = s.strip_prefix("service:").filter(|a| !a.is_empty()) {
            return Ok(UtilitySpec::Service(addr.to_string()));
        }
        Err(Error::Config(format!(
            "unknown utility `{s}` (expected bleu, chrf, matrix:PATH or service:ADDR)"
        )))
    }
}

impl fmt::Display for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilitySpec::Bleu => f.write_str("bleu"),
            UtilitySpec::Chrf => f.write_str("chrf"),
            UtilitySpec::Matrix(p) => write!(f, "matrix:{p}"),
            UtilitySpec::Service(a) => write!(f, "service:{a}"),
        }
    }
}

/// Two-stage reranking: a cheap proxy utility shortlists `keep` candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseToFine {
    pub proxy: UtilitySpec,
    pub keep: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankConfig {
    pub utility: UtilitySpec,
    pub truncation: Truncation,
    /// Active regularizers, in the order they are reported and tuned.
    pub regularizers: Vec<Regularizer>,
    pub lambdas: BTreeMap<Regularizer, f64>,
    pub coarse_to_fine: Option<CoarseToFine>,
    pub tie_break: TieBreak,
}

impl Default for RerankConfig {
    fn default() -> Self {
        RerankConfig {
            utility: UtilitySpec::Bleu,
            truncation: Truncation::Full,
            regularizers: Vec::new(),
            lambdas: BTreeMap::new(),
            coarse_to_fine: None,
            tie_break: TieBreak::BeamOrder,
        }
    }
}

impl RerankConfig {
    /// Activates `reg` with weight `lambda`, replacing any earlier weight.
    pub fn with_regularizer(mut self, reg: Regularizer, lambda: f64) -> Self {
        if !self.regularizers.contains(&reg) {
            self.regularizers.push(reg);
        }
        self.lambdas.insert(reg, lambda);
        self
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Truncation::Top(0) = self.truncation {
            return Err(Error::Config("l must be >= 1".into()));
        }
        for (i, reg) in self.regularizers.iter().enumerate() {
            if self.regularizers[..i].contains(reg) {
                return Err(Error::Config(format!("regularizer `{reg}` listed twice")));
            }
            match self.lambdas.get(reg) {
                None => return Err(Error::Config(format!("no lambda for regularizer `{reg}`"))),
                Some(l) if !l.is_finite() => {
                    return Err(Error::Config(format!("lambda for `{reg}` is not finite")))
                }
                Some(_) => {}
            }
        }
        if let Some(reg) = self.lambdas.keys().find(|r| !self.regularizers.contains(r)) {
            return Err(Error::Config(format!(
                "lambda given for inactive regularizer `{reg}`"
            )));
        }
        if let Some(c2f) = &self.coarse_to_fine {
            if c2f.keep == 0 {
                return Err(Error::Config("coarse-to-fine keep count must be >= 1".into()));
            }
        }
        Ok(())
    }
}
