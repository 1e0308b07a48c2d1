//! Regularized minimum Bayes risk (MBR) reranking of n-best translation lists.
//!
//! This crate holds the pure algorithmic part of the reranker and only needs
//! `alloc`: candidate and list types, lexical utilities (sentence BLEU,
//! sentence chrF, corpus BLEU), truncated expected-utility scoring,
//! regularizer evaluation, coarse-to-fine reranking, and the oracle/tuning
//! analyses. File formats, the scorer-service client and the command line
//! front end live in the `rmbr` crate.
//!
//! ```
//! use rmbr_core::{Candidate, NBestList, RerankConfig, LexicalUtility, rerank};
//!
//! let cands = ["a small cat sat", "the cat sat", "the cat sat down"]
//!     .iter()
//!     .zip([-0.5, -0.9, -1.2])
//!     .map(|(t, lp)| Candidate::from_text(*t, lp).unwrap())
//!     .collect();
//! let list = NBestList::new("die Katze sass", None, cands).unwrap();
//! let result = rerank(&list, &RerankConfig::default(), &LexicalUtility::bleu(), None).unwrap();
//! assert_eq!(result.selected, 1);
//! assert_eq!(result.utility_calls, 9);
//! ```

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod candidate;
pub mod config;
mod error;
pub mod mbr;
pub mod metrics;
pub mod score;

pub use analysis::{
    grid_search_lambdas, oracle_histogram, oracle_select, token_prob_by_length, tune_l,
    EvalMetric, GridSearchOutcome, HistogramBin, LSweepOutcome, OracleReport, TokenProbRow,
    TokenProbSource, TokenProbTable, DEFAULT_LAMBDA_GRID,
};
pub use candidate::{Candidate, NBestList};
pub use config::{CoarseToFine, Regularizer, RerankConfig, Truncation, UtilitySpec};
pub use error::{Error, Result, UtilityError, UtilityErrorKind};
pub use mbr::{
    build_utility_matrix, coarse_to_fine, mbr_scores, regularizer_values, rerank,
    token_entropy, LexicalUtility, PrecomputedUtility, RerankResult, Utility, UtilityMatrix,
    UtilityPair, UtilitySource,
};
pub use metrics::{corpus_bleu, sentence_bleu, sentence_chrf, MetricConfig, NGramCounts, Smoothing};
pub use score::{combine_scores, rank_candidates, TieBreak};
