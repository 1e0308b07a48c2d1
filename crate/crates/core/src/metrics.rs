//! Lexical utilities: sentence BLEU, sentence chrF and corpus BLEU.
//!
//! Inputs are pre-tokenized; BLEU works on token slices, chrF on the
//! characters of the whitespace-stripped strings.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Treatment of zero n-gram matches in sentence BLEU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    None,
    /// A zero match count at orders >= 2 is replaced by `epsilon`.
    EpsilonFloor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub bleu_max_order: usize,
    pub bleu_smoothing: Smoothing,
    pub chrf_char_order: usize,
    pub chrf_beta: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            bleu_max_order: 4,
            bleu_smoothing: Smoothing::EpsilonFloor(0.1),
            chrf_char_order: 6,
            chrf_beta: 2.0,
        }
    }
}

impl MetricConfig {
    pub fn unsmoothed() -> Self {
        MetricConfig { bleu_smoothing: Smoothing::None, ..MetricConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bleu_max_order == 0 || self.chrf_char_order == 0 {
            return Err(Error::Config("metric n-gram orders must be >= 1".into()));
        }
        if !(self.chrf_beta > 0.0 && self.chrf_beta.is_finite()) {
            return Err(Error::Config("chrF beta must be positive".into()));
        }
        if let Smoothing::EpsilonFloor(eps) = self.bleu_smoothing {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::Config(format!("smoothing epsilon must be in (0, 1], got {eps}")));
            }
        }
        Ok(())
    }
}

/// Multiset of the order-`k` n-grams of a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts<'a, T> {
    order: usize,
    counts: BTreeMap<&'a [T], usize>,
}

impl<'a, T: Ord> NGramCounts<'a, T> {
    pub fn new(seq: &'a [T], order: usize) -> Self {
        assert!(order >= 1, "n-gram order must be >= 1");
        let mut counts = BTreeMap::new();
        for gram in seq.windows(order) {
            *counts.entry(gram).or_insert(0) += 1;
        }
        NGramCounts { order, counts }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, gram: &[T]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Σ min(self[g], reference[g]) over the n-grams of `self`.
    pub fn clipped_matches(&self, reference: &NGramCounts<'_, T>) -> usize {
        self.counts
            .iter()
            .map(|(gram, &c)| c.min(reference.count(gram)))
            .sum()
    }
}

/// Clipped match and total counts for every order of one hypothesis/reference pair.
fn bleu_stats<T: Ord>(hyp: &[T], reference: &[T], max_order: usize) -> Vec<(usize, usize)> {
    (1..=max_order)
        .map(|k| {
            let h = NGramCounts::new(hyp, k);
            let r = NGramCounts::new(reference, k);
            (h.clipped_matches(&r), h.total())
        })
        .collect()
}

fn brevity_penalty(hyp_len: usize, ref_len: usize) -> f64 {
    let ratio = 1.0 - ref_len as f64 / hyp_len as f64;
    libm::exp(ratio.min(0.0))
}

/// Sentence-level BLEU of `hyp` against the single reference `reference`.
///
/// Orders longer than the hypothesis contribute nothing and are left out of
/// the geometric mean, so one-token sentences still score 1 against themselves.
pub fn sentence_bleu<T: Ord>(hyp: &[T], reference: &[T], cfg: &MetricConfig) -> Result<f64> {
    if hyp.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("BLEU needs a non-empty hypothesis and reference".into()));
    }
    cfg.validate()?;
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for (k, (matches, total)) in bleu_stats(hyp, reference, cfg.bleu_max_order)
        .into_iter()
        .enumerate()
    {
        if total == 0 {
            continue;
        }
        let matched = if matches > 0 {
            matches as f64
        } else {
            match cfg.bleu_smoothing {
                Smoothing::EpsilonFloor(eps) if k >= 1 => eps,
                _ => return Ok(0.0),
            }
        };
        log_sum += libm::log(matched / total as f64);
        orders += 1;
    }
    let precision = libm::exp(log_sum / orders as f64);
    Ok((brevity_penalty(hyp.len(), reference.len()) * precision).clamp(0.0, 1.0))
}

/// Corpus BLEU: match and total counts are summed over all sentences before
/// the precisions are taken. Unsmoothed.
pub fn corpus_bleu<H, R, T>(hyps: &[H], refs: &[R], cfg: &MetricConfig) -> Result<f64>
where
    H: AsRef<[T]>,
    R: AsRef<[T]>,
    T: Ord,
{
    if hyps.len() != refs.len() {
        return Err(Error::InvalidInput(format!(
            "{} hypotheses for {} references",
            hyps.len(),
            refs.len()
        )));
    }
    if hyps.is_empty() {
        return Err(Error::InvalidInput("empty corpus".into()));
    }
    cfg.validate()?;
    let mut matches = alloc::vec![0usize; cfg.bleu_max_order];
    let mut totals = alloc::vec![0usize; cfg.bleu_max_order];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in hyps.iter().zip(refs) {
        let (h, r) = (h.as_ref(), r.as_ref());
        hyp_len += h.len();
        ref_len += r.len();
        for (k, (m, t)) in bleu_stats(h, r, cfg.bleu_max_order).into_iter().enumerate() {
            matches[k] += m;
            totals[k] += t;
        }
    }
    if hyp_len == 0 || matches.iter().zip(&totals).any(|(&m, &t)| m == 0 || t == 0) {
        return Ok(0.0);
    }
    let log_sum: f64 = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| libm::log(m as f64 / t as f64))
        .sum();
    let precision = libm::exp(log_sum / cfg.bleu_max_order as f64);
    Ok((brevity_penalty(hyp_len, ref_len) * precision).clamp(0.0, 1.0))
}

/// Sentence-level chrF: the F-beta score of character n-gram overlap,
/// averaged over orders `1..=chrf_char_order`. Whitespace is ignored.
///
/// An order is skipped when either side has no n-grams of that length.
pub fn sentence_chrf(hyp: &str, reference: &str, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let hyp: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let reference: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if hyp.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("chrF needs non-empty hypothesis and reference".into()));
    }
    let beta2 = cfg.chrf_beta * cfg.chrf_beta;
    let mut f_sum = 0.0;
    let mut orders = 0usize;
    for k in 1..=cfg.chrf_char_order {
        let h = NGramCounts::new(&hyp, k);
        let r = NGramCounts::new(&reference, k);
        let (h_total, r_total) = (h.total(), r.total());
        if h_total == 0 || r_total == 0 {
            continue;
        }
        let m = h.clipped_matches(&r) as f64;
        let precision = m / h_total as f64;
        let recall = m / r_total as f64;
        let denom = beta2 * precision + recall;
        if denom > 0.0 {
            f_sum += (1.0 + beta2) * precision * recall / denom;
        }
        orders += 1;
    }
    Ok((f_sum / orders as f64).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn ngram_total_matches_length() {
        let seq = toks("a b a b c");
        for k in 1..=7 {
            assert_eq!(NGramCounts::new(&seq, k).total(), seq.len().saturating_sub(k - 1));
        }
        let grams = NGramCounts::new(&seq, 2);
        assert_eq!(grams.count(&["a", "b"]), 2);
        assert_eq!(grams.count(&["c", "a"]), 0);
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        let cfg = MetricConfig::default();
        let x = toks("the cat sat");
        assert_eq!(sentence_bleu(&x, &x, &cfg).unwrap(), 1.0);
        let y = toks("dogs run fast");
        assert_eq!(sentence_bleu(&x, &y, &MetricConfig::unsmoothed()).unwrap(), 0.0);
        // the floor only applies to orders >= 2
        assert_eq!(sentence_bleu(&x, &y, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn bleu_rejects_empty() {
        let cfg = MetricConfig::default();
        let empty: [&str; 0] = [];
        assert!(sentence_bleu(&empty, &toks("a"), &cfg).is_err());
        assert!(sentence_bleu(&toks("a"), &empty, &cfg).is_err());
    }

    #[test]
    fn bleu_brevity_penalty() {
        // unigram-only so the penalty is the only thing below one
        let cfg = MetricConfig { bleu_max_order: 1, ..MetricConfig::unsmoothed() };
        let s = sentence_bleu(&toks("a b"), &toks("a b c d"), &cfg).unwrap();
        assert!((s - libm::exp(1.0 - 2.0)).abs() < 1e-15);
        // longer hypothesis is not penalized by BP, only by precision
        let s = sentence_bleu(&toks("a b c d"), &toks("a b"), &cfg).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chrf_identity_and_disjoint() {
        let cfg = MetricConfig::default();
        assert_eq!(sentence_chrf("abc", "abc", &cfg).unwrap(), 1.0);
        assert_eq!(sentence_chrf("abcd", "wxyz", &cfg).unwrap(), 0.0);
        assert!(sentence_chrf("  ", "abc", &cfg).is_err());
        // whitespace is ignored
        assert_eq!(sentence_chrf("a b c", "abc", &cfg).unwrap(), 1.0);
    }

    #[test]
    fn corpus_bleu_errors_and_identity() {
        let cfg = MetricConfig::default();
        let a = vec![toks("a b c d e"), toks("x y z w")];
        assert_eq!(corpus_bleu(&a, &a, &cfg).unwrap(), 1.0);
        assert!(corpus_bleu(&a, &a[..1], &cfg).is_err());
        let empty: Vec<Vec<&str>> = vec![];
        assert!(corpus_bleu(&empty, &empty, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(MetricConfig { bleu_max_order: 0, ..MetricConfig::default() }.validate().is_err());
        assert!(MetricConfig { chrf_beta: 0.0, ..MetricConfig::default() }.validate().is_err());
        assert!(MetricConfig { bleu_smoothing: Smoothing::EpsilonFloor(0.0), ..MetricConfig::default() }
            .validate()
            .is_err());
    }

    fn words() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 1..12)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn metrics_in_unit_range(h in words(), r in words()) {
            let cfg = MetricConfig::default();
            let b = sentence_bleu(&h, &r, &cfg).unwrap();
            prop_assert!((0.0..=1.0).contains(&b));
            let c = sentence_chrf(&h.join(" "), &r.join(" "), &cfg).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert_eq!(sentence_bleu(&h, &h, &cfg).unwrap(), 1.0);
            prop_assert_eq!(sentence_chrf(&h.join(" "), &h.join(" "), &cfg).unwrap(), 1.0);
        }

        #[test]
        fn clipping_caps_matches(r in words(), extra in 1usize..6) {
            // repeating a reference token beyond its reference count adds no matches
            let tok = r[0].clone();
            let ref_count = r.iter().filter(|t| **t == tok).count();
            let refs = NGramCounts::new(&r, 1);
            let mut prev = None;
            for reps in ref_count..ref_count + extra {
                let h: Vec<String> = vec![tok.clone(); reps];
                let m = NGramCounts::new(&h, 1).clipped_matches(&refs);
                prop_assert_eq!(m, ref_count);
                if let Some(p) = prev { prop_assert!(m <= p); }
                prev = Some(m);
            }
        }
    }
}
