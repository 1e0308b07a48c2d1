//! Utility functions and the pairwise utility matrix.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::candidate::{Candidate, NBestList};
use crate::error::{Error, Result, UtilityError, UtilityErrorKind};
use crate::metrics::{sentence_bleu, sentence_chrf, MetricConfig};

/// One utility evaluation: how good is `hyp` if `pseudo_ref` were the reference?
///
/// Indices are positions in the original n-best list.
#[derive(Debug, Clone, Copy)]
pub struct UtilityPair<'a> {
    pub source: Option<&'a str>,
    pub hyp: &'a Candidate,
    pub hyp_index: usize,
    pub pseudo_ref: &'a Candidate,
    pub pseudo_ref_index: usize,
}

/// A pairwise utility `U(hyp, pseudo_ref)`.
///
/// Implementations score a whole batch at once so that remote scorers can
/// pipeline requests. The output must be aligned with `pairs`.
pub trait Utility {
    fn name(&self) -> &str;

    /// Whether the utility reads the source sentence.
    fn supports_source(&self) -> bool {
        false
    }

    /// Fails when the utility cannot answer pairs with `hyp_index < n` and
    /// `pseudo_ref_index < l`.
    fn check_coverage(&self, _n: usize, _l: usize) -> Result<()> {
        Ok(())
    }

    fn score_pairs(&self, pairs: &[UtilityPair<'_>]) -> core::result::Result<Vec<f64>, UtilityError>;
}

impl<U: Utility + ?Sized> Utility for &U {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn supports_source(&self) -> bool {
        (**self).supports_source()
    }

    fn check_coverage(&self, n: usize, l: usize) -> Result<()> {
        (**self).check_coverage(n, l)
    }

    fn score_pairs(&self, pairs: &[UtilityPair<'_>]) -> core::result::Result<Vec<f64>, UtilityError> {
        (**self).score_pairs(pairs)
    }
}

/// Hands out the utility to use for the list at a given corpus position.
///
/// Every [`Utility`] is a source that serves all lists; a slice of
/// [`PrecomputedUtility`] serves one matrix per list.
pub trait UtilitySource {
    fn utility_for(&self, list_index: usize) -> Result<&dyn Utility>;
}

impl<U: Utility> UtilitySource for U {
    fn utility_for(&self, _list_index: usize) -> Result<&dyn Utility> {
        Ok(self)
    }
}

impl UtilitySource for [PrecomputedUtility] {
    fn utility_for(&self, list_index: usize) -> Result<&dyn Utility> {
        self.get(list_index).map(|u| u as &dyn Utility).ok_or_else(|| {
            Error::InvalidInput(format!(
                "no utility matrix for list {list_index} ({} available)",
                self.len()
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexicalMetric {
    Bleu,
    Chrf,
}

/// Sentence BLEU (on tokens) or sentence chrF (on surface text) as a utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalUtility {
    pub metric: LexicalMetric,
    pub config: MetricConfig,
}

impl LexicalUtility {
    pub fn bleu() -> Self {
        LexicalUtility { metric: LexicalMetric::Bleu, config: MetricConfig::default() }
    }

    pub fn chrf() -> Self {
        LexicalUtility { metric: LexicalMetric::Chrf, config: MetricConfig::default() }
    }

    pub fn score(&self, hyp: &Candidate, pseudo_ref: &Candidate) -> Result<f64> {
        match self.metric {
            LexicalMetric::Bleu => sentence_bleu(hyp.tokens(), pseudo_ref.tokens(), &self.config),
            LexicalMetric::Chrf => sentence_chrf(hyp.text(), pseudo_ref.text(), &self.config),
        }
    }
}

impl Utility for LexicalUtility {
    fn name(&self) -> &str {
        match self.metric {
            LexicalMetric::Bleu => "bleu",
            LexicalMetric::Chrf => "chrf",
        }
    }

    fn score_pairs(&self, pairs: &[UtilityPair<'_>]) -> core::result::Result<Vec<f64>, UtilityError> {
        pairs
            .iter()
            .enumerate()
            .map(|(k, p)| {
                self.score(p.hyp, p.pseudo_ref)
                    .map_err(|e| UtilityError::scoring(k, e.to_string()))
            })
            .collect()
    }
}

/// Row-major `n x l` matrix with entry `(i, j) = U(H_i, H_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    utility_name: String,
    n: usize,
    l: usize,
    values: Vec<f64>,
}

impl UtilityMatrix {
    pub fn new(utility_name: impl Into<String>, n: usize, l: usize, values: Vec<f64>) -> Result<Self> {
        if l == 0 || l > n {
            return Err(Error::InvalidInput(format!("matrix shape {n}x{l} violates 1 <= l <= n")));
        }
        if values.len() != n * l {
            return Err(Error::InvalidInput(format!(
                "{} values for a {n}x{l} matrix",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "matrix entry ({}, {}) is not finite",
                k / l,
                k % l
            )));
        }
        Ok(UtilityMatrix { utility_name: utility_name.into(), n, l, values })
    }

    pub fn utility_name(&self) -> &str {
        &self.utility_name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.l, "({i}, {j}) outside {}x{}", self.n, self.l);
        self.values[i * self.l + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.l..(i + 1) * self.l]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.l)
    }

    /// The top-left `n x l` block.
    pub fn view(&self, n: usize, l: usize) -> Result<UtilityMatrix> {
        if n > self.n || l > self.l {
            return Err(Error::Dimension { n, l, available_n: self.n, available_l: self.l });
        }
        let values = (0..n).flat_map(|i| self.row(i)[..l].iter().copied()).collect();
        UtilityMatrix::new(self.utility_name.clone(), n, l, values)
    }
}

/// A utility that answers from a matrix computed elsewhere (e.g. a neural metric).
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedUtility {
    matrix: UtilityMatrix,
}

impl PrecomputedUtility {
    pub fn new(matrix: UtilityMatrix) -> Self {
        PrecomputedUtility { matrix }
    }

    pub fn matrix(&self) -> &UtilityMatrix {
        &self.matrix
    }
}

impl Utility for PrecomputedUtility {
    fn name(&self) -> &str {
        self.matrix.utility_name()
    }

    fn check_coverage(&self, n: usize, l: usize) -> Result<()> {
        if n > self.matrix.n || l > self.matrix.l {
            return Err(Error::Dimension {
                n,
                l,
                available_n: self.matrix.n,
                available_l: self.matrix.l,
            });
        }
        Ok(())
    }

    fn score_pairs(&self, pairs: &[UtilityPair<'_>]) -> core::result::Result<Vec<f64>, UtilityError> {
        pairs
            .iter()
            .enumerate()
            .map(|(k, p)| {
                if p.hyp_index < self.matrix.n && p.pseudo_ref_index < self.matrix.l {
                    Ok(self.matrix.get(p.hyp_index, p.pseudo_ref_index))
                } else {
                    Err(UtilityError::scoring(
                        k,
                        format!(
                            "pair ({}, {}) outside the {}x{} matrix",
                            p.hyp_index, p.pseudo_ref_index, self.matrix.n, self.matrix.l
                        ),
                    ))
                }
            })
            .collect()
    }
}

/// Evaluates `U(H_r, H_c)` for every `r` in `rows` and `c` in `cols`, in one
/// batch. Returns the matrix and the number of utility evaluations made.
pub(crate) fn evaluate_block(
    list: &NBestList,
    rows: &[usize],
    cols: &[usize],
    utility: &dyn Utility,
) -> Result<(UtilityMatrix, usize)> {
    let max_row = rows.iter().max().map_or(0, |r| r + 1);
    let max_col = cols.iter().max().map_or(0, |c| c + 1);
    utility.check_coverage(max_row, max_col)?;

    let source = utility.supports_source().then(|| list.source());
    let pairs: Vec<UtilityPair<'_>> = rows
        .iter()
        .flat_map(|&i| {
            cols.iter().map(move |&j| UtilityPair {
                source,
                hyp: list.candidate(i),
                hyp_index: i,
                pseudo_ref: list.candidate(j),
                pseudo_ref_index: j,
            })
        })
        .collect();

    let width = cols.len();
    let locate = |k: usize| (rows[k / width], cols[k % width]);
    let values = utility.score_pairs(&pairs).map_err(|e| {
        let (row, col) = if e.pair < pairs.len() { locate(e.pair) } else { (usize::MAX, usize::MAX) };
        Error::Utility { row, col, kind: e.kind, message: e.message }
    })?;
    if values.len() != pairs.len() {
        return Err(Error::Utility {
            row: usize::MAX,
            col: usize::MAX,
            kind: UtilityErrorKind::Transport,
            message: format!("utility returned {} values for {} pairs", values.len(), pairs.len()),
        });
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        let (row, col) = locate(k);
        return Err(Error::Utility {
            row,
            col,
            kind: UtilityErrorKind::NonFinite,
            message: format!("utility `{}` produced {}", utility.name(), values[k]),
        });
    }
    let matrix = UtilityMatrix::new(utility.name(), rows.len(), width, values)?;
    Ok((matrix, pairs.len()))
}

/// Computes the `n x l` matrix of `U(H_i, H_j)` against the first `l`
/// candidates, diagonal included. Makes exactly `n * l` utility evaluations.
pub fn build_utility_matrix(list: &NBestList, utility: &dyn Utility, l: usize) -> Result<UtilityMatrix> {
    let n = list.len();
    if l == 0 || l > n {
        return Err(Error::InvalidInput(format!("l = {l} outside 1..={n}")));
    }
    let rows: Vec<usize> = (0..n).collect();
    evaluate_block(list, &rows, &rows[..l], utility).map(|(m, _)| m)
}

/// Expected utility of each candidate: the mean of its row.
pub fn mbr_scores(matrix: &UtilityMatrix) -> Vec<f64> {
    let l = matrix.l() as f64;
    matrix.rows().map(|row| row.iter().sum::<f64>() / l).collect()
}
