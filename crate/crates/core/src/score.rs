//! Score combination and ranking.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::config::Regularizer;
use crate::error::{Error, Result};

/// How equal totals are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lower position in the list (higher log-probability) wins.
    #[default]
    BeamOrder,
}

/// Adds the weighted regularizer scores to the MBR scores.
///
/// `total[i] = mbr[i] + Σ λ_r · regs[r][i]`, summed in regularizer order.
/// No normalization is applied to any term.
pub fn combine_scores(
    mbr: &[f64],
    regs: &BTreeMap<Regularizer, Vec<f64>>,
    lambdas: &BTreeMap<Regularizer, f64>,
) -> Result<Vec<f64>> {
    let mut totals = mbr.to_vec();
    for (reg, values) in regs {
        if values.len() != mbr.len() {
            return Err(Error::InvalidInput(format!(
                "regularizer `{reg}` has {} scores for {} candidates",
                values.len(),
                mbr.len()
            )));
        }
        let lambda = *lambdas
            .get(reg)
            .ok_or_else(|| Error::Config(format!("no lambda for regularizer `{reg}`")))?;
        for (t, v) in totals.iter_mut().zip(values) {
            *t += lambda * v;
        }
    }
    Ok(totals)
}

/// Returns the indices of `totals` sorted by descending value, and the winner.
pub fn rank_candidates(totals: &[f64], tie_break: TieBreak) -> Result<(Vec<usize>, usize)> {
    if totals.is_empty() {
        return Err(Error::InvalidInput("nothing to rank".into()));
    }
    if let Some(i) = totals.iter().position(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(format!("score of candidate {i} is not finite")));
    }
    let mut ranking: Vec<usize> = (0..totals.len()).collect();
    match tie_break {
        // sort_by is stable, so equal totals keep ascending index order
        TieBreak::BeamOrder => ranking.sort_by(|&a, &b| totals[b].total_cmp(&totals[a])),
    }
    let selected = ranking[0];
    Ok((ranking, selected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn lp_map(values: Vec<f64>) -> BTreeMap<Regularizer, Vec<f64>> {
        BTreeMap::from([(Regularizer::Lp, values)])
    }

    #[test]
    fn combine_hand_checked() {
        // 0.6 - 0.1, 0.6 - 0.2, 0.5 - 0.05
        let totals = combine_scores(
            &[0.6, 0.6, 0.5],
            &lp_map(vec![-1.0, -2.0, -0.5]),
            &BTreeMap::from([(Regularizer::Lp, 0.1)]),
        )
        .unwrap();
        let expected = [0.5, 0.4, 0.45];
        for (t, e) in totals.iter().zip(expected) {
            assert!((t - e).abs() < 1e-12, "{t} vs {e}");
        }
    }

    #[test]
    fn combine_without_regularizers_is_identity() {
        let mbr = [0.3, -1.5, 2.0];
        assert_eq!(combine_scores(&mbr, &BTreeMap::new(), &BTreeMap::new()).unwrap(), mbr);
    }

    #[test]
    fn combine_constant_regularizer_ties() {
        let regs = BTreeMap::from([(Regularizer::Lm, vec![-7.25, -7.25])]);
        let totals =
            combine_scores(&[0.0, 0.0], &regs, &BTreeMap::from([(Regularizer::Lm, 1.0)])).unwrap();
        assert_eq!(totals[0], totals[1]);
        assert_eq!(rank_candidates(&totals, TieBreak::BeamOrder).unwrap().1, 0);
    }

    #[test]
    fn combine_errors() {
        let err = combine_scores(&[0.1, 0.2], &lp_map(vec![-1.0]), &BTreeMap::from([(Regularizer::Lp, 1.0)]));
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        let err = combine_scores(&[0.1], &lp_map(vec![-1.0]), &BTreeMap::new());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_candidates(&[0.5, 0.4, 0.45], TieBreak::BeamOrder).unwrap(), (vec![0, 2, 1], 0));
        assert_eq!(rank_candidates(&[1.0, 1.0], TieBreak::BeamOrder).unwrap().1, 0);
        assert_eq!(rank_candidates(&[-3.0, -1.0, -2.0], TieBreak::BeamOrder).unwrap().1, 1);
        assert!(rank_candidates(&[], TieBreak::BeamOrder).is_err());
        assert!(rank_candidates(&[0.0, f64::NAN], TieBreak::BeamOrder).is_err());
    }

    proptest! {
        #[test]
        fn ranking_is_sorted_permutation(totals in proptest::collection::vec(-5i32..5, 1..20)) {
            let totals: Vec<f64> = totals.into_iter().map(f64::from).collect();
            let (ranking, selected) = rank_candidates(&totals, TieBreak::BeamOrder).unwrap();
            let mut seen = ranking.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..totals.len()).collect::<Vec<_>>());
            prop_assert_eq!(selected, ranking[0]);
            for w in ranking.windows(2) {
                let (a, b) = (w[0], w[1]);
                prop_assert!(totals[a] > totals[b] || (totals[a] == totals[b] && a < b));
            }
        }

        #[test]
        fn constant_shift_keeps_ranking(
            mbr in proptest::collection::vec(0.0f64..1.0, 1..12),
            lp_seed in proptest::collection::vec(-10.0f64..0.0, 12),
            shift in -50.0f64..50.0,
            lambda in prop::sample::select(vec![0.001, 0.01, 0.1, 1.0, 10.0]),
        ) {
            let n = mbr.len();
            let lambdas = BTreeMap::from([(Regularizer::Lp, lambda)]);
            let base = combine_scores(&mbr, &lp_map(lp_seed[..n].to_vec()), &lambdas).unwrap();
            let shifted_regs: Vec<f64> = lp_seed[..n].iter().map(|v| v + shift).collect();
            let shifted = combine_scores(&mbr, &lp_map(shifted_regs), &lambdas).unwrap();
            // ranks may only change through floating-point rounding of near ties
            let (r1, _) = rank_candidates(&base, TieBreak::BeamOrder).unwrap();
            let (r2, _) = rank_candidates(&shifted, TieBreak::BeamOrder).unwrap();
            for (a, b) in r1.iter().zip(&r2) {
                if a != b {
                    prop_assert!((base[*a] - base[*b]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn zero_lambda_ranks_by_mbr(
            mbr in proptest::collection::vec(0.0f64..1.0, 1..12),
            lp in proptest::collection::vec(-10.0f64..0.0, 12),
        ) {
            let n = mbr.len();
            let totals = combine_scores(
                &mbr,
                &lp_map(lp[..n].to_vec()),
                &BTreeMap::from([(Regularizer::Lp, 0.0)]),
            ).unwrap();
            prop_assert_eq!(
                rank_candidates(&totals, TieBreak::BeamOrder).unwrap(),
                rank_candidates(&mbr, TieBreak::BeamOrder).unwrap()
            );
        }
    }
}
