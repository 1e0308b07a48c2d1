//! Synthetic n-best fixtures and a scripted scorer double shared by the
//! integration tests.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::os::unix::net::UnixStream;
use std::thread;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmbr::service::{ScorerClient, ScorerRequest, PROTOCOL_VERSION};
use rmbr_core::{Candidate, NBestList};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    format!("w{}", rng.gen_range(0..vocab))
}

pub fn sentence(rng: &mut ChaCha8Rng, len: usize, vocab: usize) -> Vec<String> {
    (0..len).map(|_| word(rng, vocab)).collect()
}

/// Replaces `k` distinct positions with tokens from a disjoint vocabulary.
pub fn perturb(rng: &mut ChaCha8Rng, tokens: &[String], k: usize) -> Vec<String> {
    let mut out = tokens.to_vec();
    let mut positions: Vec<usize> = (0..out.len()).collect();
    positions.shuffle(rng);
    for &p in positions.iter().take(k) {
        out[p] = format!("x{}", rng.gen_range(0..1000));
    }
    out
}

/// Descending log-probabilities in (-12, -0.1].
pub fn beam_log_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut lps: Vec<f64> = (0..n).map(|_| -rng.gen_range(0.1..12.0)).collect();
    lps.sort_by(|a, b| b.total_cmp(a));
    lps
}

/// A candidate with every optional score filled in.
pub fn rich_candidate(rng: &mut ChaCha8Rng, tokens: Vec<String>, log_prob: f64) -> Candidate {
    let len = tokens.len();
    let token_log_probs: Vec<f64> = (0..len).map(|_| -rng.gen_range(0.0..3.0)).collect();
    let passes: Vec<f64> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0.5..20.0)).collect();
    let entropies: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..4.0)).collect();
    Candidate::new(tokens.join(" "), tokens, log_prob)
        .unwrap()
        .with_token_log_probs(token_log_probs)
        .unwrap()
        .with_external_score("lm", -rng.gen_range(1.0..40.0))
        .unwrap()
        .with_external_score("bt", -rng.gen_range(1.0..40.0))
        .unwrap()
        .with_external_score("qe", rng.gen_range(0.0..1.0))
        .unwrap()
        .with_mc_pass_scores(passes)
        .unwrap()
        .with_token_entropies(entropies)
        .unwrap()
}

/// Lists of `n` noisy variants of a reference, with every score field.
pub fn synthetic_suite(seed: u64, lists: usize, n: usize) -> Vec<NBestList> {
    let mut rng = rng(seed);
    (0..lists)
        .map(|s| {
            let len = rng.gen_range(4..20);
            let reference = sentence(&mut rng, len, 30);
            let lps = beam_log_probs(&mut rng, n);
            let cands = lps
                .iter()
                .map(|&lp| {
                    let k = rng.gen_range(0..=len.min(6));
                    let toks = perturb(&mut rng, &reference, k);
                    rich_candidate(&mut rng, toks, lp)
                })
                .collect();
            let ref_lps: Vec<f64> = (0..len).map(|_| -rng.gen_range(0.0..3.0)).collect();
            NBestList::new(format!("source {s}"), Some(reference.join(" ")), cands)
                .unwrap()
                .with_reference_token_log_probs(ref_lps)
                .unwrap()
        })
        .collect()
}

/// Lists where the best-scored candidate is an unrelated outlier and one
/// planted candidate sits at the centre of a cluster of paraphrases.
/// Returns the lists and the planted position of each.
pub fn consensus_suite(seed: u64, lists: usize, n: usize) -> (Vec<NBestList>, Vec<usize>) {
    let mut rng = rng(seed);
    let mut planted = Vec::new();
    let out = (0..lists)
        .map(|s| {
            let len = rng.gen_range(10..16);
            let reference = sentence(&mut rng, len, 200);
            let consensus = perturb(&mut rng, &reference, 1);
            let outlier: Vec<String> = (0..len).map(|i| format!("o{i}_{}", rng.gen_range(0..50))).collect();
            let pos = rng.gen_range(1..n);
            planted.push(pos);
            let lps = beam_log_probs(&mut rng, n);
            let cands = (0..n)
                .map(|i| {
                    let toks = match i {
                        0 => outlier.clone(),
                        _ if i == pos => consensus.clone(),
                        _ => perturb(&mut rng, &consensus, 3),
                    };
                    Candidate::new(toks.join(" "), toks, lps[i]).unwrap()
                })
                .collect();
            NBestList::new(format!("source {s}"), Some(reference.join(" ")), cands).unwrap()
        })
        .collect();
    (out, planted)
}

/// Lists whose first candidate is mediocre, the next three are good and the
/// tail is identical junk far from the reference.
pub fn junk_tail_suite(seed: u64, lists: usize, n: usize) -> Vec<NBestList> {
    let mut rng = rng(seed);
    (0..lists)
        .map(|s| {
            let len = 12;
            let reference = sentence(&mut rng, len, 500);
            let junk: Vec<String> = (0..len).map(|i| format!("junk{i}")).collect();
            let lps = beam_log_probs(&mut rng, n);
            let cands = (0..n)
                .map(|i| {
                    let toks = match i {
                        0 => perturb(&mut rng, &reference, len / 2),
                        1..=3 => perturb(&mut rng, &reference, 1),
                        _ => junk.clone(),
                    };
                    Candidate::new(toks.join(" "), toks, lps[i]).unwrap()
                })
                .collect();
            NBestList::new(format!("source {s}"), Some(reference.join(" ")), cands).unwrap()
        })
        .collect()
}

/// Connects to an in-process scorer that answers the handshake and then,
/// for every `batch` requests, emits the lines produced by `respond`.
pub fn scripted_scorer<F>(batch: usize, respond: F) -> ScorerClient
where
    F: Fn(Vec<ScorerRequest>) -> Vec<String> + Send + 'static,
{
    let (client_end, server_end) = UnixStream::pair().unwrap();
    thread::spawn(move || {
        let mut writer = server_end.try_clone().unwrap();
        let mut lines = BufReader::new(server_end).lines();
        let _hello = lines.next();
        writeln!(writer, "{{\"protocol\":\"{PROTOCOL_VERSION}\"}}").unwrap();
        let mut pending = Vec::new();
        for line in lines {
            let Ok(line) = line else { return };
            pending.push(serde_json::from_str::<ScorerRequest>(&line).unwrap());
            if pending.len() == batch {
                for out in respond(std::mem::take(&mut pending)) {
                    if writeln!(writer, "{out}").is_err() {
                        return;
                    }
                }
            }
        }
    });
    let reader = client_end.try_clone().unwrap();
    ScorerClient::from_stream(reader, client_end, Duration::from_secs(10)).unwrap()
}
