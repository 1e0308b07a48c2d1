//! File formats, scorer-service transport and the `rmbr` command line on top
//! of [`rmbr_core`].

mod error;

pub mod cli;
pub mod matrix;
pub mod nbest;
pub mod provider;
pub mod results;
pub mod service;

pub use error::{Error, Result};
pub use matrix::{load_utility_matrices, load_utility_matrix, write_utility_matrices, write_utility_matrix};
pub use nbest::{load_nbest, read_nbest, write_nbest};
pub use provider::UtilityProvider;
pub use results::{read_full_results, write_results, OutputMode, ResultRecord};
pub use service::{scorer_service_score, ScorePair, ScorerClient, ServiceError, ServiceUtility};
