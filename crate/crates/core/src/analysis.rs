//! Oracle analysis, token-probability tables, and the λ / l tuners.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::candidate::{Candidate, NBestList};
use crate::config::{Regularizer, RerankConfig};
use crate::error::{Error, Result};
use crate::mbr::{
    build_utility_matrix, mbr_scores, regularizer_values, rerank, RerankResult, UtilitySource,
};
use crate::metrics::{corpus_bleu, sentence_bleu, sentence_chrf, MetricConfig};
use crate::score::{combine_scores, rank_candidates};

/// Default candidate weights for the λ grid search.
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.001, 0.01, 0.1, 1.0, 10.0];

/// Metric used to compare selections with references.
///
/// Sentence scores use the configured BLEU smoothing; the corpus score is
/// unsmoothed corpus BLEU, or the mean sentence chrF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMetric {
    Bleu(MetricConfig),
    Chrf(MetricConfig),
}

impl Default for EvalMetric {
    fn default() -> Self {
        EvalMetric::Bleu(MetricConfig::default())
    }
}

impl EvalMetric {
    pub fn sentence(&self, hyp: &Candidate, reference: &str) -> Result<f64> {
        match self {
            EvalMetric::Bleu(cfg) => {
                let r: Vec<&str> = reference.split_whitespace().collect();
                let h: Vec<&str> = hyp.tokens().iter().map(|t| t.as_str()).collect();
                sentence_bleu(&h, &r, cfg)
            }
            EvalMetric::Chrf(cfg) => sentence_chrf(hyp.text(), reference, cfg),
        }
    }

    pub fn corpus(&self, hyps: &[&Candidate], refs: &[&str]) -> Result<f64> {
        match self {
            EvalMetric::Bleu(cfg) => {
                let h: Vec<Vec<&str>> = hyps
                    .iter()
                    .map(|c| c.tokens().iter().map(|t| t.as_str()).collect())
                    .collect();
                let r: Vec<Vec<&str>> =
                    refs.iter().map(|r| r.split_whitespace().collect()).collect();
                corpus_bleu(&h, &r, cfg)
            }
            EvalMetric::Chrf(cfg) => {
                if hyps.len() != refs.len() || hyps.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "{} hypotheses for {} references",
                        hyps.len(),
                        refs.len()
                    )));
                }
                let mut sum = 0.0;
                for (h, r) in hyps.iter().zip(refs) {
                    sum += sentence_chrf(h.text(), r, cfg)?;
                }
                Ok(sum / hyps.len() as f64)
            }
        }
    }
}

fn reference_of(list: &NBestList, index: usize) -> Result<&str> {
    list.reference()
        .ok_or_else(|| Error::InvalidInput(format!("list {index} has no reference")))
}

fn references(lists: &[NBestList]) -> Result<Vec<&str>> {
    if lists.is_empty() {
        return Err(Error::InvalidInput("no lists given".into()));
    }
    lists.iter().enumerate().map(|(i, l)| reference_of(l, i)).collect()
}

/// Candidate closest to the reference under `metric`; earliest wins ties.
pub fn oracle_select(list: &NBestList, metric: &EvalMetric) -> Result<(usize, f64)> {
    let reference = list
        .reference()
        .ok_or_else(|| Error::InvalidInput("oracle selection needs a reference".into()))?;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in list.candidates().iter().enumerate() {
        let s = metric.sentence(c, reference)?;
        if s > best.1 {
            best = (i, s);
        }
    }
    Ok(best)
}

/// Count of oracle positions within the 1-based rank interval `first..=last`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub first: usize,
    pub last: usize,
    pub count: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Per list: oracle position (0-based) and its sentence score.
    pub oracles: Vec<(usize, f64)>,
    pub bins: Vec<HistogramBin>,
    /// Corpus metric of the oracle selections.
    pub corpus_score: f64,
}

/// Where oracle translations sit in their lists, binned by rank.
pub fn oracle_histogram(lists: &[NBestList], metric: &EvalMetric, bin_width: usize) -> Result<OracleReport> {
    if bin_width == 0 {
        return Err(Error::InvalidInput("bin width must be >= 1".into()));
    }
    let refs = references(lists)?;
    let oracles = lists
        .iter()
        .map(|l| oracle_select(l, metric))
        .collect::<Result<Vec<_>>>()?;

    let max_n = lists.iter().map(NBestList::len).max().unwrap_or(0);
    let n_bins = max_n.div_ceil(bin_width);
    let mut counts = alloc::vec![0usize; n_bins];
    for (idx, _) in &oracles {
        counts[idx / bin_width] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin {
            first: b * bin_width + 1,
            last: ((b + 1) * bin_width).min(max_n),
            count,
            proportion: count as f64 / lists.len() as f64,
        })
        .collect();

    let picks: Vec<&Candidate> = lists
        .iter()
        .zip(&oracles)
        .map(|(l, (idx, _))| l.candidate(*idx))
        .collect();
    let corpus_score = metric.corpus(&picks, &refs)?;
    Ok(OracleReport { oracles, bins, corpus_score })
}

/// Which sentence's token probabilities are tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenProbSource {
    /// The first candidate of each list.
    Top1,
    /// The reference, using `reference_token_log_probs`.
    Reference,
}

/// Mean per-sentence token probability of the sentences whose length lies in
/// `first..=last` tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenProbRow {
    pub first: usize,
    pub last: usize,
    pub sentences: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenProbTable {
    pub interval_width: usize,
    /// Populated intervals only, by increasing length.
    pub rows: Vec<TokenProbRow>,
}

/// Average token probability by sentence length.
///
/// A sentence's value is the arithmetic mean of `exp(token_log_prob)` over
/// its tokens; each row averages that value over its sentences.
pub fn token_prob_by_length(
    lists: &[NBestList],
    interval_width: usize,
    which: TokenProbSource,
) -> Result<TokenProbTable> {
    if interval_width == 0 {
        return Err(Error::InvalidInput("interval width must be >= 1".into()));
    }
    let mut buckets: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for (i, list) in lists.iter().enumerate() {
        let log_probs = match which {
            TokenProbSource::Top1 => list.candidate(0).token_log_probs().ok_or_else(|| {
                Error::MissingScore {
                    candidate: 0,
                    regularizer: "tokenprob",
                    field: format!("token_log_probs (list {i})"),
                }
            })?,
            TokenProbSource::Reference => list.reference_token_log_probs().ok_or_else(|| {
                Error::MissingScore {
                    candidate: 0,
                    regularizer: "tokenprob",
                    field: format!("reference_token_log_probs (list {i})"),
                }
            })?,
        };
        let prob = log_probs.iter().map(|lp| libm::exp(*lp)).sum::<f64>() / log_probs.len() as f64;
        let entry = buckets.entry((log_probs.len() - 1) / interval_width).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += prob;
    }
    let rows = buckets
        .into_iter()
        .map(|(b, (sentences, sum))| TokenProbRow {
            first: b * interval_width + 1,
            last: (b + 1) * interval_width,
            sentences,
            mean: (sum / sentences as f64).clamp(0.0, 1.0),
        })
        .collect();
    Ok(TokenProbTable { interval_width, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchOutcome {
    pub lambdas: BTreeMap<Regularizer, f64>,
    pub objective: f64,
    /// Number of λ configurations evaluated.
    pub evaluations: usize,
    /// Every configuration (λ in `cfg.regularizers` order) with its objective.
    pub table: Vec<(Vec<f64>, f64)>,
}

/// Exhaustive search over `grid^r` for the `r` active regularizers of `cfg`.
///
/// The objective is the corpus metric of the selections. Ties go to the
/// lexicographically smallest λ vector.
pub fn grid_search_lambdas(
    dev_lists: &[NBestList],
    cfg: &RerankConfig,
    grid: &[f64],
    metric: &EvalMetric,
    target: &dyn UtilitySource,
    proxy: Option<&dyn UtilitySource>,
) -> Result<GridSearchOutcome> {
    cfg.validate()?;
    let refs = references(dev_lists)?;
    let r = cfg.regularizers.len();
    if r == 0 {
        return Err(Error::Config("grid search needs at least one active regularizer".into()));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::Config("lambda grid must be non-empty and finite".into()));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // MBR and regularizer scores do not depend on λ, so score each list once
    let prepared = dev_lists
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let proxy = proxy.map(|p| p.utility_for(i)).transpose()?;
            rerank(list, cfg, target.utility_for(i)?, proxy)
        })
        .collect::<Result<Vec<RerankResult>>>()?;

    let combos = grid.len().checked_pow(r as u32).ok_or_else(|| {
        Error::Config(format!("grid of {} values over {r} regularizers is too large", grid.len()))
    })?;
    let mut table = Vec::with_capacity(combos);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for code in 0..combos {
        // most significant digit is the first regularizer: lexicographic order
        let mut digits = alloc::vec![0usize; r];
        let mut rest = code;
        for d in digits.iter_mut().rev() {
            *d = rest % grid.len();
            rest /= grid.len();
        }
        let values: Vec<f64> = digits.iter().map(|&d| grid[d]).collect();
        let lambdas: BTreeMap<Regularizer, f64> =
            cfg.regularizers.iter().copied().zip(values.iter().copied()).collect();

        let mut picks = Vec::with_capacity(dev_lists.len());
        for (list, res) in dev_lists.iter().zip(&prepared) {
            let totals = combine_scores(&res.mbr_scores, &res.regularizer_scores, &lambdas)?;
            let (_, slot) = rank_candidates(&totals, cfg.tie_break)?;
            picks.push(list.candidate(res.candidates[slot]));
        }
        let objective = metric.corpus(&picks, &refs)?;
        if best.as_ref().is_none_or(|(_, b)| objective > *b) {
            best = Some((values.clone(), objective));
        }
        table.push((values, objective));
    }

    let (values, objective) = best.expect("at least one configuration");
    Ok(GridSearchOutcome {
        lambdas: cfg.regularizers.iter().copied().zip(values).collect(),
        objective,
        evaluations: table.len(),
        table,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LSweepOutcome {
    pub l: usize,
    pub objective: f64,
    /// `(l, objective)` for every `l` in `1..=n`.
    pub curve: Vec<(usize, f64)>,
}

/// Sweeps the truncation `l` over `1..=n` (n = longest dev list; shorter
/// lists use their own length) and returns the best `l`, smallest on ties.
///
/// Regularizers and λ come from `cfg`; coarse-to-fine is not supported.
pub fn tune_l(
    dev_lists: &[NBestList],
    cfg: &RerankConfig,
    metric: &EvalMetric,
    target: &dyn UtilitySource,
) -> Result<LSweepOutcome> {
    cfg.validate()?;
    if cfg.coarse_to_fine.is_some() {
        return Err(Error::Config("l tuning does not support coarse-to-fine reranking".into()));
    }
    let refs = references(dev_lists)?;

    // one full n x n matrix per list; every l is a prefix of its columns
    let mut prepared = Vec::with_capacity(dev_lists.len());
    for (i, list) in dev_lists.iter().enumerate() {
        let matrix = build_utility_matrix(list, target.utility_for(i)?, list.len())?;
        let mut regs = BTreeMap::new();
        for &reg in &cfg.regularizers {
            regs.insert(reg, regularizer_values(list, reg)?);
        }
        prepared.push((matrix, regs));
    }

    let max_n = dev_lists.iter().map(NBestList::len).max().unwrap_or(0);
    let mut curve = Vec::with_capacity(max_n);
    for l in 1..=max_n {
        let mut picks = Vec::with_capacity(dev_lists.len());
        for (list, (matrix, regs)) in dev_lists.iter().zip(&prepared) {
            let n = list.len();
            let mbr = mbr_scores(&matrix.view(n, l.min(n))?);
            let totals = combine_scores(&mbr, regs, &cfg.lambdas)?;
            let (_, selected) = rank_candidates(&totals, cfg.tie_break)?;
            picks.push(list.candidate(selected));
        }
        curve.push((l, metric.corpus(&picks, &refs)?));
    }

    let (l, objective) = curve
        .iter()
        .copied()
        .fold(None, |best: Option<(usize, f64)>, (l, obj)| match best {
            Some((_, b)) if obj <= b => best,
            _ => Some((l, obj)),
        })
        .expect("lists are non-empty");
    Ok(LSweepOutcome { l, objective, curve })
}
