//! Turns a utility spec string into something the reranker can call.

use std::sync::Arc;

use rayon::prelude::*;
use rmbr_core::{
    LexicalUtility, PrecomputedUtility, Utility, UtilityError, UtilityPair, UtilitySource, UtilitySpec,
};

use crate::error::Result;
use crate::matrix::load_utility_matrices;
use crate::service::{ScorerClient, ServiceUtility};

/// A lexical utility that scores the pairs of a batch on the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelLexical(pub LexicalUtility);

impl Utility for ParallelLexical {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn score_pairs(&self, pairs: &[UtilityPair<'_>]) -> std::result::Result<Vec<f64>, UtilityError> {
        pairs
            .par_iter()
            .enumerate()
            .map(|(k, p)| {
                self.0
                    .score(p.hyp, p.pseudo_ref)
                    .map_err(|e| UtilityError::scoring(k, e.to_string()))
            })
            .collect()
    }
}

#[derive(Debug)]
pub enum UtilityProvider {
    Lexical(ParallelLexical),
    /// One precomputed matrix per n-best list, in input order.
    Matrices(Vec<PrecomputedUtility>),
    Service(ServiceUtility),
}

impl UtilityProvider {
    /// Builds the provider for `spec`. Matrix files are loaded and checked
    /// against the number of lists; services are connected.
    pub fn resolve(spec: &UtilitySpec, lists: usize, send_source: bool) -> Result<Self> {
        Ok(match spec {
            UtilitySpec::Bleu => UtilityProvider::Lexical(ParallelLexical(LexicalUtility::bleu())),
            UtilitySpec::Chrf => UtilityProvider::Lexical(ParallelLexical(LexicalUtility::chrf())),
            UtilitySpec::Matrix(path) => {
                let matrices = load_utility_matrices(path)?;
                if matrices.len() != lists {
                    return Err(rmbr_core::Error::InvalidInput(format!(
                        "{path}: {} matrices for {lists} n-best lists",
                        matrices.len()
                    ))
                    .into());
                }
                UtilityProvider::Matrices(matrices.into_iter().map(PrecomputedUtility::new).collect())
            }
            UtilitySpec::Service(addr) => {
                let timeout = crate::service::timeout_from_env()
                    .map_err(rmbr_core::Error::Config)?;
                let client = ScorerClient::connect(addr, timeout)?;
                UtilityProvider::Service(ServiceUtility::new(Arc::new(client), send_source))
            }
        })
    }
}

impl UtilitySource for UtilityProvider {
    fn utility_for(&self, list_index: usize) -> rmbr_core::Result<&dyn Utility> {
        match self {
            UtilityProvider::Lexical(u) => Ok(u),
            UtilityProvider::Matrices(ms) => ms.as_slice().utility_for(list_index),
            UtilityProvider::Service(u) => Ok(u),
        }
    }
}
