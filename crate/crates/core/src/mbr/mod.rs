//! Expected-utility scoring, regularized reranking and coarse-to-fine reranking.

mod regularizer;
mod utility;

pub use regularizer::{regularizer_values, token_entropy};
pub use utility::{
    build_utility_matrix, mbr_scores, LexicalMetric, LexicalUtility, PrecomputedUtility, Utility,
    UtilityMatrix, UtilityPair, UtilitySource,
};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::candidate::NBestList;
use crate::config::{Regularizer, RerankConfig};
use crate::error::{Error, Result};
use crate::score::{combine_scores, rank_candidates};
use regularizer::regularizer_value;
use utility::evaluate_block;

/// Full score breakdown of one reranked list.
///
/// All per-candidate vectors are aligned with `candidates`, which holds
/// positions in the original list (all of them for direct reranking, the
/// survivors for coarse-to-fine). `ranking` and `selected` are also original
/// positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RerankResult {
    pub candidates: Vec<usize>,
    pub mbr_scores: Vec<f64>,
    pub regularizer_scores: BTreeMap<Regularizer, Vec<f64>>,
    pub total_scores: Vec<f64>,
    pub ranking: Vec<usize>,
    pub selected: usize,
    /// Number of pairwise utility evaluations, over all stages.
    pub utility_calls: usize,
    /// Number of pseudo-references used for the final MBR scores.
    pub l: usize,
    /// Stage-one proxy MBR scores for every candidate (coarse-to-fine only).
    pub proxy_mbr_scores: Option<Vec<f64>>,
}

impl RerankResult {
    /// Position of `candidate` (an original list index) in the score vectors.
    pub fn slot(&self, candidate: usize) -> Option<usize> {
        self.candidates.iter().position(|&c| c == candidate)
    }
}

/// Reranks `list` by MBR score plus weighted regularizers.
///
/// When `cfg.coarse_to_fine` is set, `proxy` must be given and the keep count
/// is capped at the list length.
pub fn rerank(
    list: &NBestList,
    cfg: &RerankConfig,
    target: &dyn Utility,
    proxy: Option<&dyn Utility>,
) -> Result<RerankResult> {
    cfg.validate()?;
    match &cfg.coarse_to_fine {
        None => {
            let members: Vec<usize> = (0..list.len()).collect();
            score_members(list, &members, cfg, target)
        }
        Some(c2f) => {
            let proxy = proxy.ok_or_else(|| {
                Error::Config("coarse-to-fine reranking needs a proxy utility".into())
            })?;
            coarse_to_fine(list, proxy, target, c2f.keep.min(list.len()), cfg)
        }
    }
}

/// Two-stage reranking. Stage one ranks all `n` candidates by proxy MBR
/// against the whole list (`n * n` calls) and keeps the best `keep`. Stage two
/// reranks the survivors, in beam order, with the target utility and the
/// configured regularizers; `l` is capped at `keep`.
pub fn coarse_to_fine(
    list: &NBestList,
    proxy: &dyn Utility,
    target: &dyn Utility,
    keep: usize,
    cfg: &RerankConfig,
) -> Result<RerankResult> {
    let n = list.len();
    if keep == 0 || keep > n {
        return Err(Error::InvalidInput(format!("keep = {keep} outside 1..={n}")));
    }
    let all: Vec<usize> = (0..n).collect();
    let (proxy_matrix, proxy_calls) = evaluate_block(list, &all, &all, proxy)?;
    let proxy_scores = mbr_scores(&proxy_matrix);
    let (proxy_ranking, _) = rank_candidates(&proxy_scores, cfg.tie_break)?;

    let mut survivors = proxy_ranking[..keep].to_vec();
    survivors.sort_unstable();

    let mut result = score_members(list, &survivors, cfg, target)?;
    result.utility_calls += proxy_calls;
    result.proxy_mbr_scores = Some(proxy_scores);
    Ok(result)
}

/// Direct reranking restricted to `members` (ascending original positions).
fn score_members(
    list: &NBestList,
    members: &[usize],
    cfg: &RerankConfig,
    utility: &dyn Utility,
) -> Result<RerankResult> {
    // read regularizer inputs first so missing fields fail before any utility call
    let mut regularizer_scores = BTreeMap::new();
    for &reg in &cfg.regularizers {
        let values = members
            .iter()
            .map(|&i| regularizer_value(list.candidate(i), i, reg))
            .collect::<Result<Vec<f64>>>()?;
        regularizer_scores.insert(reg, values);
    }

    let l = cfg.truncation.resolve(members.len());
    let (matrix, utility_calls) = evaluate_block(list, members, &members[..l], utility)?;
    let mbr = mbr_scores(&matrix);
    let total_scores = combine_scores(&mbr, &regularizer_scores, &cfg.lambdas)?;
    let (order, _) = rank_candidates(&total_scores, cfg.tie_break)?;
    let ranking: Vec<usize> = order.iter().map(|&k| members[k]).collect();

    Ok(RerankResult {
        candidates: members.to_vec(),
        mbr_scores: mbr,
        regularizer_scores,
        total_scores,
        selected: ranking[0],
        ranking,
        utility_calls,
        l,
        proxy_mbr_scores: None,
    })
}
