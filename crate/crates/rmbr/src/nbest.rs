//! Line-delimited JSON n-best files: one source sentence per line.
//!
//! ```text
//! {"source":"...","reference":"...","candidates":[{"text":"...","tokens":["..."],"log_prob":-1.2}, ...]}
//! ```
//!
//! Optional candidate fields: `token_log_probs`, `external_scores`
//! (`{"lm":..,"bt":..,"qe":..}`), `mc_pass_scores`, `token_entropies`.
//! When `tokens` is absent the text is split on whitespace.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rmbr_core::{Candidate, NBestList};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    pub log_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_log_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub external_scores: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_pass_scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_entropies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NBestFileRecord {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Model log-probabilities of the reference tokens, for token-probability tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_token_log_probs: Option<Vec<f64>>,
    pub candidates: Vec<CandidateRecord>,
}

impl CandidateRecord {
    pub fn from_candidate(c: &Candidate) -> Self {
        CandidateRecord {
            text: c.text().to_string(),
            tokens: Some(c.tokens().to_vec()),
            log_prob: c.log_prob(),
            token_log_probs: c.token_log_probs().map(<[f64]>::to_vec),
            external_scores: c.external_scores().clone(),
            mc_pass_scores: c.mc_pass_scores().map(<[f64]>::to_vec),
            token_entropies: c.token_entropies().map(<[f64]>::to_vec),
        }
    }

    pub fn into_candidate(self) -> rmbr_core::Result<Candidate> {
        let tokens = self
            .tokens
            .unwrap_or_else(|| self.text.split_whitespace().map(str::to_string).collect());
        let mut c = Candidate::new(self.text, tokens, self.log_prob)?;
        if let Some(v) = self.token_log_probs {
            c = c.with_token_log_probs(v)?;
        }
        for (name, value) in self.external_scores {
            c = c.with_external_score(name, value)?;
        }
        if let Some(v) = self.mc_pass_scores {
            c = c.with_mc_pass_scores(v)?;
        }
        if let Some(v) = self.token_entropies {
            c = c.with_token_entropies(v)?;
        }
        Ok(c)
    }
}

impl NBestFileRecord {
    pub fn from_list(list: &NBestList) -> Self {
        NBestFileRecord {
            source: list.source().to_string(),
            reference: list.reference().map(str::to_string),
            reference_token_log_probs: list.reference_token_log_probs().map(<[f64]>::to_vec),
            candidates: list.candidates().iter().map(CandidateRecord::from_candidate).collect(),
        }
    }

    /// Validates the record. The flag tells whether candidates had to be
    /// re-sorted into beam order.
    pub fn into_list(self) -> std::result::Result<(NBestList, bool), String> {
        let candidates = self
            .candidates
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.into_candidate().map_err(|e| format!("candidate {i}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let (mut list, resorted) = NBestList::from_unsorted(self.source, self.reference, candidates)
            .map_err(|e| e.to_string())?;
        if let Some(v) = self.reference_token_log_probs {
            list = list.with_reference_token_log_probs(v).map_err(|e| e.to_string())?;
        }
        Ok((list, resorted))
    }
}

/// Something worth telling the user that did not stop loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    pub line: usize,
    pub message: String,
}

/// Parses n-best records from `reader`; `origin` names the input in errors.
pub fn read_nbest<R: BufRead>(reader: R, origin: &Path) -> Result<(Vec<NBestList>, Vec<LoadWarning>)> {
    let mut lists = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: NBestFileRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        let (list, resorted) = record.into_list().map_err(|m| Error::parse(origin, line_no, m))?;
        if resorted {
            warnings.push(LoadWarning {
                line: line_no,
                message: "candidates were not in descending log_prob order; re-sorted".into(),
            });
        }
        lists.push(list);
    }
    if lists.is_empty() {
        return Err(Error::EmptyInput { path: origin.to_path_buf() });
    }
    Ok((lists, warnings))
}

/// Loads an n-best file, logging a warning for every re-sorted record.
pub fn load_nbest(path: impl AsRef<Path>) -> Result<Vec<NBestList>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (lists, warnings) = read_nbest(BufReader::new(file), path)?;
    for w in warnings {
        log::warn!("{}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(lists)
}

pub fn write_nbest(path: impl AsRef<Path>, lists: &[NBestList]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for list in lists {
        let line = serde_json::to_string(&NBestFileRecord::from_list(list))
            .expect("records always serialize");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<(Vec<NBestList>, Vec<LoadWarning>)> {
        read_nbest(text.as_bytes(), Path::new("test.jsonl"))
    }

    const TWO: &str = r#"{"source":"s1","reference":"a b","candidates":[{"text":"a b","log_prob":-1.0},{"text":"a c","log_prob":-2.0}]}

{"source":"s2","candidates":[{"text":"x","tokens":["x"],"log_prob":-0.5,"external_scores":{"qe":0.25}}]}
"#;

    #[test]
    fn reads_two_records() {
        let (lists, warnings) = parse(TWO).unwrap();
        assert_eq!(lists.len(), 2);
        assert!(warnings.is_empty());
        assert_eq!(lists[0].reference(), Some("a b"));
        assert_eq!(lists[0].candidate(1).tokens(), ["a", "c"]);
        assert_eq!(lists[1].candidate(0).external_score("qe"), Some(0.25));
    }

    #[test]
    fn length_mismatch_names_field_and_line() {
        let bad = r#"{"source":"s","candidates":[{"text":"a b","log_prob":-1.0,"token_log_probs":[-0.1]}]}"#;
        let text = format!("{}\n{bad}\n", TWO.lines().next().unwrap());
        match parse(&text) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("token_log_probs"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_order_candidates_are_resorted_with_warning() {
        let text = r#"{"source":"s","candidates":[{"text":"c","log_prob":-3.0},{"text":"a","log_prob":-1.0},{"text":"b","log_prob":-2.0}]}"#;
        let (lists, warnings) = parse(text).unwrap();
        let texts: Vec<&str> = lists[0].candidates().iter().map(|c| c.text()).collect();
        assert_eq!(texts, ["a", "b", "c"]);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].line, 1);
    }

    #[test]
    fn empty_and_malformed_inputs() {
        assert!(matches!(parse("\n\n"), Err(Error::EmptyInput { .. })));
        assert!(matches!(parse("{not json}"), Err(Error::Parse { line: 1, .. })));
        let unknown = r#"{"source":"s","candidates":[{"text":"a","log_prob":-1.0,"logprob":2}]}"#;
        assert!(matches!(parse(unknown), Err(Error::Parse { .. })));
        let empty_list = r#"{"source":"s","candidates":[]}"#;
        assert!(matches!(parse(empty_list), Err(Error::Parse { .. })));
    }
}
