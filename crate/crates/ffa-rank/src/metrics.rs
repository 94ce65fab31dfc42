//! The six rank-prediction metrics, each a pure function of one
//! [`RankOutcome`].
//!
//! All metrics consume rows in predicted-rank order: list position `i`
//! (1-based) is the player predicted to finish `i`-th. The shared relevance
//! score of a prediction is `1 / (1 + error)` where `error` is the absolute
//! rank difference, so a perfect prediction scores 1 and credit decays with
//! the size of the miss.
//!
//! Besides the [`RankOutcome`] entry points, each position-indexed metric is
//! also exposed over a raw error vector (`*_from_errors`). Those are what
//! the rank-bin analysis uses: a bin keeps the errors computed on the full
//! match but re-indexes positions `1..=k` within the bin.

use std::fmt;
use std::sync::Arc;

use crate::model::RankOutcome;

/// Identifier for one of the six metrics, in the crate's canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricName {
    Accuracy,
    Mae,
    KendallTau,
    Mrr,
    Ap,
    Ndcg,
}

impl MetricName {
    pub const ALL: [MetricName; 6] = [
        MetricName::Accuracy,
        MetricName::Mae,
        MetricName::KendallTau,
        MetricName::Mrr,
        MetricName::Ap,
        MetricName::Ndcg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Accuracy => "accuracy",
            MetricName::Mae => "mae",
            MetricName::KendallTau => "kendall_tau",
            MetricName::Mrr => "mrr",
            MetricName::Ap => "ap",
            MetricName::Ndcg => "ndcg",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named metric value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricValue {
    pub name: MetricName,
    pub value: f64,
}

/// Position discount for NDCG. The default is `1 / log2(i + 1)`; custom
/// weightings must be strictly positive and non-increasing in position.
#[derive(Clone)]
pub struct NdcgWeighting {
    discount: Arc<dyn Fn(u32) -> f64 + Send + Sync>,
}

impl NdcgWeighting {
    /// The standard logarithmic discount, `1 / log2(i + 1)`.
    pub fn log2() -> Self {
        NdcgWeighting {
            discount: Arc::new(|position| 1.0 / f64::from(position + 1).log2()),
        }
    }

    pub fn custom(discount: impl Fn(u32) -> f64 + Send + Sync + 'static) -> Self {
        NdcgWeighting {
            discount: Arc::new(discount),
        }
    }

    /// Weight of the 1-based position `i`.
    pub fn discount(&self, position: u32) -> f64 {
        let w = (self.discount)(position);
        debug_assert!(w > 0.0, "discount must be strictly positive");
        w
    }
}

impl Default for NdcgWeighting {
    fn default() -> Self {
        NdcgWeighting::log2()
    }
}

impl fmt::Debug for NdcgWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NdcgWeighting(..)")
    }
}

/// Relevance of a prediction with the given absolute rank error.
pub fn relevance(error: u32) -> f64 {
    1.0 / (1.0 + f64::from(error))
}

/// Fraction of exact rank hits.
pub fn accuracy_from_errors(errors: &[u32]) -> f64 {
    let hits = errors.iter().filter(|&&e| e == 0).count();
    hits as f64 / errors.len() as f64
}

/// Mean absolute rank error.
pub fn mae_from_errors(errors: &[u32]) -> f64 {
    let total: u64 = errors.iter().map(|&e| u64::from(e)).sum();
    total as f64 / errors.len() as f64
}

/// Mean relevance, `mean(1 / (1 + error))`.
pub fn mrr_from_errors(errors: &[u32]) -> f64 {
    let total: f64 = errors.iter().map(|&e| relevance(e)).sum();
    total / errors.len() as f64
}

/// Average precision with a configurable hit threshold: position `i` counts
/// as relevant when `error_i <= hit_threshold`, and `P(i)` is the cumulative
/// relevant fraction up to `i` in position order.
pub fn average_precision_with_threshold(errors: &[u32], hit_threshold: u32) -> f64 {
    let mut hits = 0u32;
    let mut total = 0.0;
    for (i, &e) in errors.iter().enumerate() {
        if e <= hit_threshold {
            hits += 1;
        }
        let precision = f64::from(hits) / (i as f64 + 1.0);
        total += precision * relevance(e);
    }
    total / errors.len() as f64
}

/// Average precision with the default exact-hit threshold.
pub fn average_precision_from_errors(errors: &[u32]) -> f64 {
    average_precision_with_threshold(errors, 0)
}

/// Position-discounted mean relevance, normalized by the ideal (all
/// relevances 1 at the same positions).
pub fn ndcg_from_errors(errors: &[u32], weighting: &NdcgWeighting) -> f64 {
    let mut dcg = 0.0;
    let mut ideal = 0.0;
    for (i, &e) in errors.iter().enumerate() {
        let w = weighting.discount(i as u32 + 1);
        dcg += w * relevance(e);
        ideal += w;
    }
    dcg / ideal
}

/// Counts inversions of `values` by merge sort. `scratch` must have the same
/// length as `values`.
fn count_inversions(values: &mut [u32], scratch: &mut [u32]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = values.split_at_mut(mid);
    let mut inversions =
        count_inversions(left, &mut scratch[..mid]) + count_inversions(right, &mut scratch[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            scratch[k] = left[i];
            i += 1;
        } else {
            scratch[k] = right[j];
            inversions += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        scratch[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        scratch[k] = right[j];
        j += 1;
        k += 1;
    }
    values.copy_from_slice(&scratch[..n]);
    inversions
}

/// Kendall's tau for two tie-free rankings, given as the observed-rank
/// sequence read in predicted-rank order. A pair is discordant exactly when
/// it is an inversion of this sequence, so `tau = (n_c - n_d) / C(k, 2)`
/// reduces to inversion counting (`O(k log k)`).
pub fn kendall_tau_from_sequence(observed_in_predicted_order: &[u32]) -> f64 {
    let k = observed_in_predicted_order.len();
    debug_assert!(k >= 2);
    let mut values = observed_in_predicted_order.to_vec();
    let mut scratch = vec![0u32; k];
    let discordant = count_inversions(&mut values, &mut scratch);
    let pairs = (k as u64) * (k as u64 - 1) / 2;
    let concordant = pairs - discordant;
    (concordant as f64 - discordant as f64) / pairs as f64
}

/// All six metrics over a set of `(predicted_rank, observed_rank)` rows that
/// need not be a full match — e.g. one observed-rank bin. Rows must be
/// sorted by predicted rank; positions are re-indexed `1..=k` while errors
/// keep their full-match values. Kendall's tau is `None` for singleton sets
/// (no pairs to compare).
#[derive(Clone, Copy, Debug)]
pub struct RowMetrics {
    pub accuracy: f64,
    pub mae: f64,
    pub kendall_tau: Option<f64>,
    pub mrr: f64,
    pub ap: f64,
    pub ndcg: f64,
}

pub fn evaluate_rows(rows: &[(u32, u32)], weighting: &NdcgWeighting) -> RowMetrics {
    debug_assert!(!rows.is_empty());
    debug_assert!(rows.windows(2).all(|w| w[0].0 < w[1].0), "rows must be sorted by predicted rank");
    let errors: Vec<u32> = rows
        .iter()
        .map(|&(p, o)| (i64::from(p) - i64::from(o)).unsigned_abs() as u32)
        .collect();
    let kendall_tau = if rows.len() >= 2 {
        let obs: Vec<u32> = rows.iter().map(|&(_, o)| o).collect();
        Some(kendall_tau_from_sequence(&obs))
    } else {
        None
    };
    RowMetrics {
        accuracy: accuracy_from_errors(&errors),
        mae: mae_from_errors(&errors),
        kendall_tau,
        mrr: mrr_from_errors(&errors),
        ap: average_precision_from_errors(&errors),
        ndcg: ndcg_from_errors(&errors, weighting),
    }
}

fn outcome_rows(outcome: &RankOutcome) -> Vec<(u32, u32)> {
    outcome
        .rows()
        .iter()
        .map(|r| (r.predicted_rank, r.observed_rank))
        .collect()
}

fn outcome_errors(outcome: &RankOutcome) -> Vec<u32> {
    crate::model::errors_of(outcome).iter().map(|e| e.value()).collect()
}

/// Ratio of exactly predicted ranks to the number of players.
pub fn accuracy(outcome: &RankOutcome) -> f64 {
    accuracy_from_errors(&outcome_errors(outcome))
}

/// Average absolute difference between predicted and observed ranks.
pub fn mae(outcome: &RankOutcome) -> f64 {
    mae_from_errors(&outcome_errors(outcome))
}

/// Rank correlation from concordant/discordant pair counts.
pub fn kendall_tau(outcome: &RankOutcome) -> f64 {
    let obs: Vec<u32> = outcome.rows().iter().map(|r| r.observed_rank).collect();
    kendall_tau_from_sequence(&obs)
}

/// Mean reciprocal rank, the mean relevance over the field.
pub fn mrr(outcome: &RankOutcome) -> f64 {
    mrr_from_errors(&outcome_errors(outcome))
}

/// Precision-weighted mean relevance in predicted-rank order.
pub fn average_precision(outcome: &RankOutcome) -> f64 {
    average_precision_from_errors(&outcome_errors(outcome))
}

/// Normalized discounted cumulative gain of the relevance scores.
pub fn ndcg(outcome: &RankOutcome, weighting: &NdcgWeighting) -> f64 {
    ndcg_from_errors(&outcome_errors(outcome), weighting)
}

/// All six metrics, in [`MetricName::ALL`] order, with the default NDCG
/// weighting.
pub fn evaluate_all(outcome: &RankOutcome) -> [MetricValue; 6] {
    let m = evaluate_rows(&outcome_rows(outcome), &NdcgWeighting::log2());
    [
        MetricValue { name: MetricName::Accuracy, value: m.accuracy },
        MetricValue { name: MetricName::Mae, value: m.mae },
        MetricValue { name: MetricName::KendallTau, value: m.kendall_tau.expect("outcome has >= 2 rows") },
        MetricValue { name: MetricName::Mrr, value: m.mrr },
        MetricValue { name: MetricName::Ap, value: m.ap },
        MetricValue { name: MetricName::Ndcg, value: m.ndcg },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::outcome_from_ranks;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    /// O(k^2) pair-counting oracle, kept independent of the merge-sort path.
    pub(crate) fn kendall_tau_brute(pred: &[u32], obs: &[u32]) -> f64 {
        let k = pred.len();
        let mut concordant = 0i64;
        let mut discordant = 0i64;
        for i in 0..k {
            for j in (i + 1)..k {
                let p = (pred[i] as i64 - pred[j] as i64).signum();
                let o = (obs[i] as i64 - obs[j] as i64).signum();
                if p * o > 0 {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
        (concordant - discordant) as f64 / (k * (k - 1) / 2) as f64
    }

    #[test]
    fn accuracy_examples() {
        assert_abs_diff_eq!(accuracy(&outcome_from_ranks(&[1, 2, 3], &[1, 2, 3])), 1.0, epsilon = TOL);
        assert_abs_diff_eq!(
            accuracy(&outcome_from_ranks(&[1, 2, 3], &[1, 3, 2])),
            1.0 / 3.0,
            epsilon = TOL
        );
        assert_abs_diff_eq!(accuracy(&outcome_from_ranks(&[1, 2], &[2, 1])), 0.0, epsilon = TOL);
    }

    #[test]
    fn mae_examples() {
        assert_abs_diff_eq!(mae(&outcome_from_ranks(&[1, 2, 3], &[1, 2, 3])), 0.0, epsilon = TOL);
        assert_abs_diff_eq!(
            mae(&outcome_from_ranks(&[1, 2, 3], &[3, 2, 1])),
            4.0 / 3.0,
            epsilon = TOL
        );
        assert_abs_diff_eq!(mae(&outcome_from_ranks(&[1, 2], &[2, 1])), 1.0, epsilon = TOL);
    }

    #[test]
    fn kendall_tau_examples() {
        assert_abs_diff_eq!(kendall_tau(&outcome_from_ranks(&[1, 2, 3], &[1, 2, 3])), 1.0, epsilon = TOL);
        assert_abs_diff_eq!(kendall_tau(&outcome_from_ranks(&[1, 2, 3], &[3, 2, 1])), -1.0, epsilon = TOL);
        // Three pairs, one discordant.
        assert_abs_diff_eq!(
            kendall_tau(&outcome_from_ranks(&[1, 2, 3], &[1, 3, 2])),
            1.0 / 3.0,
            epsilon = TOL
        );
    }

    #[test]
    fn mrr_examples() {
        assert_abs_diff_eq!(mrr_from_errors(&[0, 0]), 1.0, epsilon = TOL);
        assert_abs_diff_eq!(mrr_from_errors(&[1, 1]), 0.5, epsilon = TOL);
        // (1 + 1/2 + 1/3) / 3 = 11/18
        assert_abs_diff_eq!(mrr_from_errors(&[0, 1, 2]), 11.0 / 18.0, epsilon = TOL);
    }

    #[test]
    fn average_precision_examples() {
        assert_abs_diff_eq!(average_precision_from_errors(&[0, 0, 0]), 1.0, epsilon = TOL);
        // P = (1, 1/2, 2/3); AP = (1 + 1/4 + 2/3) / 3 = 23/36
        assert_abs_diff_eq!(average_precision_from_errors(&[0, 1, 0]), 23.0 / 36.0, epsilon = TOL);
        assert_abs_diff_eq!(average_precision_from_errors(&[2, 1, 3]), 0.0, epsilon = TOL);
    }

    #[test]
    fn average_precision_threshold_counts_near_hits() {
        // With threshold 1 every position of [0,1,0] is "relevant": P(i)=1.
        let relaxed = average_precision_with_threshold(&[0, 1, 0], 1);
        assert_abs_diff_eq!(relaxed, (1.0 + 0.5 + 1.0) / 3.0, epsilon = TOL);
    }

    #[test]
    fn ndcg_examples() {
        let w = NdcgWeighting::log2();
        assert_abs_diff_eq!(ndcg_from_errors(&[0, 0, 0], &w), 1.0, epsilon = TOL);
        // Frozen: DCG = 0.5 + 1/log2(3), IDCG = 1 + 1/log2(3).
        assert_abs_diff_eq!(ndcg_from_errors(&[1, 0], &w), 0.693426403617271, epsilon = TOL);
        assert_abs_diff_eq!(ndcg_from_errors(&[0, 1], &w), 0.806573596382729, epsilon = TOL);
        // The earlier-position error is penalized more.
        assert!(ndcg_from_errors(&[0, 1], &w) > ndcg_from_errors(&[1, 0], &w));
    }

    #[test]
    fn evaluate_all_perfect_and_reversed() {
        let perfect = evaluate_all(&outcome_from_ranks(&[1, 2, 3], &[1, 2, 3]));
        let expected = [1.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        for (m, e) in perfect.iter().zip(expected) {
            assert_abs_diff_eq!(m.value, e, epsilon = TOL);
        }

        let reversed = evaluate_all(&outcome_from_ranks(&[1, 2], &[2, 1]));
        // Constant relevance 0.5 makes NDCG exactly 0.5.
        let expected = [0.0, 1.0, -1.0, 0.5, 0.0, 0.5];
        for (m, e) in reversed.iter().zip(expected) {
            assert_abs_diff_eq!(m.value, e, epsilon = TOL);
        }
    }

    #[test]
    fn evaluate_all_matches_individual_metrics() {
        let outcome = outcome_from_ranks(&[2, 5, 1, 4, 3], &[4, 1, 5, 2, 3]);
        let all = evaluate_all(&outcome);
        let w = NdcgWeighting::log2();
        assert_eq!(all[0].value, accuracy(&outcome));
        assert_eq!(all[1].value, mae(&outcome));
        assert_eq!(all[2].value, kendall_tau(&outcome));
        assert_eq!(all[3].value, mrr(&outcome));
        assert_eq!(all[4].value, average_precision(&outcome));
        assert_eq!(all[5].value, ndcg(&outcome, &w));
    }

    #[test]
    fn singleton_bin_has_no_tau() {
        let m = evaluate_rows(&[(3, 5)], &NdcgWeighting::log2());
        assert!(m.kendall_tau.is_none());
        assert_abs_diff_eq!(m.mae, 2.0, epsilon = TOL);
        assert_abs_diff_eq!(m.mrr, 1.0 / 3.0, epsilon = TOL);
    }

    fn permutation_strategy(n: usize) -> impl Strategy<Value = Vec<u32>> {
        Just((1..=n as u32).collect::<Vec<u32>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn tau_matches_brute_force(obs in (2usize..40).prop_flat_map(permutation_strategy)) {
            let pred: Vec<u32> = (1..=obs.len() as u32).collect();
            let fast = kendall_tau_from_sequence(&obs);
            let brute = kendall_tau_brute(&pred, &obs);
            prop_assert!((fast - brute).abs() < 1e-12);
        }

        #[test]
        fn ap_never_exceeds_mrr(errors in proptest::collection::vec(0u32..30, 1..60)) {
            prop_assert!(average_precision_from_errors(&errors) <= mrr_from_errors(&errors) + 1e-12);
        }

        #[test]
        fn reducing_an_error_improves_mrr_ndcg_and_mae(
            errors in proptest::collection::vec(0u32..30, 2..50),
            pick in any::<proptest::sample::Index>(),
        ) {
            let w = NdcgWeighting::log2();
            let nonzero: Vec<usize> = errors
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, _)| i)
                .collect();
            prop_assume!(!nonzero.is_empty());
            let i = nonzero[pick.index(nonzero.len())];
            let mut reduced = errors.clone();
            reduced[i] -= 1;

            prop_assert!(mrr_from_errors(&reduced) > mrr_from_errors(&errors));
            prop_assert!(ndcg_from_errors(&reduced, &w) > ndcg_from_errors(&errors, &w));
            prop_assert!(mae_from_errors(&reduced) < mae_from_errors(&errors));
            prop_assert!(accuracy_from_errors(&reduced) >= accuracy_from_errors(&errors));
        }

        #[test]
        fn earlier_errors_hurt_positional_metrics_more(
            n in 2usize..30,
            error in 1u32..20,
            before in any::<proptest::sample::Index>(),
            after in any::<proptest::sample::Index>(),
        ) {
            let w = NdcgWeighting::log2();
            let (i, j) = (before.index(n), after.index(n));
            prop_assume!(i != j);
            let (i, j) = (i.min(j), i.max(j));
            let mut early = vec![0u32; n];
            early[i] = error;
            let mut late = vec![0u32; n];
            late[j] = error;
            prop_assert!(ndcg_from_errors(&early, &w) <= ndcg_from_errors(&late, &w) + 1e-12);
            prop_assert!(average_precision_from_errors(&early) <= average_precision_from_errors(&late) + 1e-12);
        }

        #[test]
        fn input_row_order_is_irrelevant(
            obs in (2usize..20).prop_flat_map(permutation_strategy),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = obs.len() as u32;
            let pred: Vec<u32> = (1..=n).collect();
            let base = outcome_from_ranks(&pred, &obs);
            let mut paired: Vec<(u32, u32)> = pred.iter().copied().zip(obs.iter().copied()).collect();
            paired.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = outcome_from_ranks(
                &paired.iter().map(|&(p, _)| p).collect::<Vec<_>>(),
                &paired.iter().map(|&(_, o)| o).collect::<Vec<_>>(),
            );
            for (a, b) in evaluate_all(&base).iter().zip(evaluate_all(&shuffled).iter()) {
                prop_assert_eq!(a.value, b.value);
            }
        }
    }
}
