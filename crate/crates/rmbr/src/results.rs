//! Result writers: plain selections, or one JSON record per source with the
//! whole score breakdown.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rmbr_core::{NBestList, Regularizer, RerankResult};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    /// One selected translation per line.
    Text,
    /// One [`ResultRecord`] per line.
    Full,
}

impl FromStr for OutputMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(OutputMode::Text),
            "full" => Ok(OutputMode::Full),
            _ => Err(format!("unknown output mode `{s}` (expected text or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub source: String,
    pub selected: usize,
    pub text: String,
    pub candidates: Vec<usize>,
    pub mbr_scores: Vec<f64>,
    pub regularizer_scores: BTreeMap<String, Vec<f64>>,
    pub total_scores: Vec<f64>,
    pub ranking: Vec<usize>,
    pub utility_calls: usize,
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_mbr_scores: Option<Vec<f64>>,
}

impl ResultRecord {
    pub fn new(result: &RerankResult, list: &NBestList) -> Self {
        ResultRecord {
            source: list.source().to_string(),
            selected: result.selected,
            text: list.candidate(result.selected).text().to_string(),
            candidates: result.candidates.clone(),
            mbr_scores: result.mbr_scores.clone(),
            regularizer_scores: result
                .regularizer_scores
                .iter()
                .map(|(r, v)| (r.name().to_string(), v.clone()))
                .collect(),
            total_scores: result.total_scores.clone(),
            ranking: result.ranking.clone(),
            utility_calls: result.utility_calls,
            l: result.l,
            proxy_mbr_scores: result.proxy_mbr_scores.clone(),
        }
    }

    pub fn into_result(self) -> rmbr_core::Result<RerankResult> {
        let regularizer_scores = self
            .regularizer_scores
            .into_iter()
            .map(|(name, v)| Ok((name.parse::<Regularizer>()?, v)))
            .collect::<rmbr_core::Result<BTreeMap<_, _>>>()?;
        Ok(RerankResult {
            candidates: self.candidates,
            mbr_scores: self.mbr_scores,
            regularizer_scores,
            total_scores: self.total_scores,
            ranking: self.ranking,
            selected: self.selected,
            utility_calls: self.utility_calls,
            l: self.l,
            proxy_mbr_scores: self.proxy_mbr_scores,
        })
    }
}

pub fn write_results_to<W: Write>(
    out: &mut W,
    results: &[RerankResult],
    lists: &[NBestList],
    mode: OutputMode,
) -> std::io::Result<()> {
    assert_eq!(results.len(), lists.len(), "results and lists must be aligned");
    for (result, list) in results.iter().zip(lists) {
        match mode {
            OutputMode::Text => writeln!(out, "{}", list.candidate(result.selected).text())?,
            OutputMode::Full => {
                let record = ResultRecord::new(result, list);
                writeln!(out, "{}", serde_json::to_string(&record).expect("records serialize"))?;
            }
        }
    }
    Ok(())
}

pub fn write_results(
    path: impl AsRef<Path>,
    results: &[RerankResult],
    lists: &[NBestList],
    mode: OutputMode,
) -> Result<()> {
    let path = path.as_ref();
    if results.len() != lists.len() {
        return Err(rmbr_core::Error::InvalidInput(format!(
            "{} results for {} lists",
            results.len(),
            lists.len()
        ))
        .into());
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_results_to(&mut out, results, lists, mode)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads a file written in [`OutputMode::Full`].
pub fn read_full_results(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?,
        );
    }
    Ok(records)
}
