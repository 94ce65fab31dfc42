//! Elo ratings extended to free-for-all fields.
//!
//! A free-for-all match between `N` players is treated as the set of all
//! `C(N,2)` pairwise comparisons. Each player's overall win probability is
//! their pairwise win probabilities summed over the field and normalized by
//! `C(N,2)`, and the observed rank is normalized the same way, which keeps
//! the update zero-sum: points awarded equal points deducted.

use super::{pair_count, pairwise_sums, pairwise_sums_seq, validate_field, RatingSystem};
use crate::model::Rating;
use crate::{Error, Result};

/// Elo hyperparameters: `k` scales the per-match rating change, `d` scales
/// how strongly rating differences translate to win probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EloConfig {
    pub initial_mu: f64,
    pub k: f64,
    pub d: f64,
}

impl Default for EloConfig {
    fn default() -> Self {
        EloConfig {
            initial_mu: 1500.0,
            k: 10.0,
            d: 400.0,
        }
    }
}

impl EloConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidConfig(format!("k must be positive, got {}", self.k)));
        }
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(Error::InvalidConfig(format!("d must be positive, got {}", self.d)));
        }
        if !self.initial_mu.is_finite() {
            return Err(Error::InvalidConfig("initial_mu must be finite".into()));
        }
        Ok(())
    }
}

#[inline]
fn pair_prob(mu_i: f64, mu_j: f64, d: f64) -> f64 {
    1.0 / (1.0 + ((mu_j - mu_i) / d).exp())
}

fn check_mus(mus: &[f64]) -> Result<()> {
    if let Some(bad) = mus.iter().find(|m| !m.is_finite()) {
        return Err(Error::InvalidRating(format!("non-finite rating {bad}")));
    }
    Ok(())
}

/// Probability that a player rated `mu_i` beats a player rated `mu_j`.
pub fn elo_win_prob(mu_i: f64, mu_j: f64, d: f64) -> Result<f64> {
    if !mu_i.is_finite() || !mu_j.is_finite() {
        return Err(Error::InvalidRating("non-finite rating".into()));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidConfig(format!("d must be positive, got {d}")));
    }
    Ok(pair_prob(mu_i, mu_j, d))
}

fn win_probs_with<F>(mus: &[f64], d: f64, kernel: F) -> Result<Vec<f64>>
where
    F: FnOnce(usize) -> Vec<f64>,
{
    if mus.len() < 2 {
        return Err(Error::FieldTooSmall(mus.len()));
    }
    check_mus(mus)?;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidConfig(format!("d must be positive, got {d}")));
    }
    let c = pair_count(mus.len() as u32);
    let mut sums = kernel(mus.len());
    for s in &mut sums {
        *s /= c;
    }
    Ok(sums)
}

/// Overall win probability of every player in the field; the vector sums
/// to 1 up to rounding. Dispatches to rayon for large fields when the
/// `parallel` feature is on.
pub fn elo_ffa_win_probs(mus: &[f64], d: f64) -> Result<Vec<f64>> {
    win_probs_with(mus, d, |n| pairwise_sums(n, |i, j| pair_prob(mus[i], mus[j], d)))
}

/// Sequential variant of [`elo_ffa_win_probs`], byte-identical to it.
pub fn elo_ffa_win_probs_seq(mus: &[f64], d: f64) -> Result<Vec<f64>> {
    win_probs_with(mus, d, |n| {
        pairwise_sums_seq(n, |i, j| pair_prob(mus[i], mus[j], d))
    })
}

/// Forced-parallel variant of [`elo_ffa_win_probs`], byte-identical to it.
#[cfg(feature = "parallel")]
pub fn elo_ffa_win_probs_par(mus: &[f64], d: f64) -> Result<Vec<f64>> {
    win_probs_with(mus, d, |n| {
        super::pairwise_sums_par(n, |i, j| pair_prob(mus[i], mus[j], d))
    })
}

/// Overall win probability of the player at index `i`.
pub fn elo_ffa_win_prob(mus: &[f64], i: usize, d: f64) -> Result<f64> {
    if i >= mus.len() {
        return Err(Error::InvalidRating(format!(
            "player index {i} out of range for field of {}",
            mus.len()
        )));
    }
    Ok(elo_ffa_win_probs(mus, d)?[i])
}

/// Observed rank normalized so a full field's results sum to 1:
/// `(N - rank) / C(N,2)`.
pub fn normalized_observed_result(observed_rank: u32, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::FieldTooSmall(n as usize));
    }
    if observed_rank < 1 || observed_rank > n {
        return Err(Error::RankOutOfRange {
            rank: observed_rank,
            n,
        });
    }
    Ok(f64::from(n - observed_rank) / pair_count(n))
}

/// Post-match ratings: `mu' = mu + k * (R' - Pr(win, field))`. The deltas
/// sum to zero because both the normalized results and the win
/// probabilities sum to 1.
pub fn elo_ffa_update(mus: &[f64], observed_ranks: &[u32], cfg: &EloConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = validate_field(mus.len(), observed_ranks)?;
    let probs = elo_ffa_win_probs(mus, cfg.d)?;
    let mut out = Vec::with_capacity(mus.len());
    for i in 0..mus.len() {
        let r_prime = normalized_observed_result(observed_ranks[i], n)?;
        out.push(mus[i] + cfg.k * (r_prime - probs[i]));
    }
    Ok(out)
}

/// Elo behind the uniform [`RatingSystem`] interface.
#[derive(Clone, Debug, Default)]
pub struct EloSystem {
    cfg: EloConfig,
}

impl EloSystem {
    pub fn new(cfg: EloConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(EloSystem { cfg })
    }

    pub fn config(&self) -> &EloConfig {
        &self.cfg
    }
}

impl RatingSystem for EloSystem {
    fn name(&self) -> &'static str {
        "elo"
    }

    fn default_rating(&self) -> Rating {
        Rating::point(self.cfg.initial_mu)
    }

    fn score_for_sorting(&self, rating: &Rating) -> f64 {
        rating.mu
    }

    fn update(&self, ratings: &[Rating], observed_ranks: &[u32]) -> Result<Vec<Rating>> {
        let mus: Vec<f64> = ratings.iter().map(|r| r.mu).collect();
        let updated = elo_ffa_update(&mus, observed_ranks, &self.cfg)?;
        Ok(updated.into_iter().map(Rating::point).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-9;

    #[test]
    fn win_prob_examples() {
        assert_abs_diff_eq!(elo_win_prob(1500.0, 1500.0, 400.0).unwrap(), 0.5, epsilon = TOL);
        // Frozen: 1 / (1 + e^{-1}).
        assert_abs_diff_eq!(
            elo_win_prob(1900.0, 1500.0, 400.0).unwrap(),
            0.731058578630005,
            epsilon = TOL
        );
        assert_abs_diff_eq!(
            elo_win_prob(1500.0, 1900.0, 400.0).unwrap(),
            0.268941421369995,
            epsilon = TOL
        );
    }

    #[test]
    fn win_prob_is_complementary() {
        let p = elo_win_prob(1723.0, 1489.0, 400.0).unwrap();
        let q = elo_win_prob(1489.0, 1723.0, 400.0).unwrap();
        assert_abs_diff_eq!(p + q, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn win_prob_rejects_bad_input() {
        assert!(elo_win_prob(f64::NAN, 1500.0, 400.0).is_err());
        assert!(elo_win_prob(1500.0, f64::INFINITY, 400.0).is_err());
        assert!(elo_win_prob(1500.0, 1500.0, 0.0).is_err());
    }

    #[test]
    fn ffa_probs_equal_field() {
        // Each player's pairwise sum is 3 * 0.5 = 1.5, / C(4,2) = 0.25.
        let probs = elo_ffa_win_probs(&[1500.0; 4], 400.0).unwrap();
        for p in probs {
            assert_abs_diff_eq!(p, 0.25, epsilon = TOL);
        }
    }

    #[test]
    fn ffa_prob_reduces_to_head_to_head() {
        let mus = [1900.0, 1500.0];
        let ffa = elo_ffa_win_prob(&mus, 0, 400.0).unwrap();
        let pairwise = elo_win_prob(1900.0, 1500.0, 400.0).unwrap();
        assert_eq!(ffa, pairwise);
    }

    #[test]
    fn ffa_probs_sum_to_one() {
        let mus = [1821.0, 1500.0, 1499.5, 1305.0, 2100.0];
        let sum: f64 = elo_ffa_win_probs(&mus, 400.0).unwrap().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ffa_probs_reject_small_fields() {
        assert!(matches!(
            elo_ffa_win_probs(&[1500.0], 400.0),
            Err(Error::FieldTooSmall(1))
        ));
    }

    #[test]
    fn normalized_result_examples() {
        assert_abs_diff_eq!(normalized_observed_result(3, 3).unwrap(), 0.0, epsilon = TOL);
        assert_abs_diff_eq!(
            normalized_observed_result(1, 3).unwrap(),
            2.0 / 3.0,
            epsilon = TOL
        );
        let total: f64 = (1..=3)
            .map(|r| normalized_observed_result(r, 3).unwrap())
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = TOL);
        assert!(normalized_observed_result(4, 3).is_err());
        assert!(normalized_observed_result(0, 3).is_err());
    }

    #[test]
    fn head_to_head_update_moves_ten_points_halved() {
        let cfg = EloConfig::default();
        let updated = elo_ffa_update(&[1500.0, 1500.0], &[1, 2], &cfg).unwrap();
        assert_abs_diff_eq!(updated[0], 1505.0, epsilon = TOL);
        assert_abs_diff_eq!(updated[1], 1495.0, epsilon = TOL);
    }

    #[test]
    fn three_way_update_of_equal_field() {
        let cfg = EloConfig::default();
        let updated = elo_ffa_update(&[1500.0; 3], &[1, 2, 3], &cfg).unwrap();
        // Deltas are K * (2/3 - 1/3, 1/3 - 1/3, 0 - 1/3).
        assert_abs_diff_eq!(updated[0] - 1500.0, 10.0 / 3.0, epsilon = TOL);
        assert_abs_diff_eq!(updated[1] - 1500.0, 0.0, epsilon = TOL);
        assert_abs_diff_eq!(updated[2] - 1500.0, -10.0 / 3.0, epsilon = TOL);
    }

    #[test]
    fn update_rejects_misaligned_lists() {
        let cfg = EloConfig::default();
        assert!(matches!(
            elo_ffa_update(&[1500.0, 1500.0], &[1, 2, 3], &cfg),
            Err(Error::MisalignedLists { .. })
        ));
    }

    #[test]
    fn update_is_zero_sum() {
        let cfg = EloConfig::default();
        let mus = [1802.0, 1430.0, 1515.0, 1666.0, 1390.0, 2088.0];
        let ranks = [3, 5, 1, 2, 6, 4];
        let updated = elo_ffa_update(&mus, &ranks, &cfg).unwrap();
        let drift: f64 = updated.iter().zip(&mus).map(|(a, b)| a - b).sum();
        assert_abs_diff_eq!(drift, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn translation_leaves_probabilities_unchanged() {
        let mus = [1802.0, 1430.0, 1515.0, 1666.0];
        let shifted: Vec<f64> = mus.iter().map(|m| m + 250.0).collect();
        let base = elo_ffa_win_probs(&mus, 400.0).unwrap();
        let moved = elo_ffa_win_probs(&shifted, 400.0).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn order_equivariance() {
        let cfg = EloConfig::default();
        let mus = [1802.0, 1430.0, 1515.0, 1666.0];
        let ranks = [2, 4, 1, 3];
        let updated = elo_ffa_update(&mus, &ranks, &cfg).unwrap();
        // Rotate players one position; outputs must rotate identically.
        let mus_rot = [1666.0, 1802.0, 1430.0, 1515.0];
        let ranks_rot = [3, 2, 4, 1];
        let updated_rot = elo_ffa_update(&mus_rot, &ranks_rot, &cfg).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(updated[i], updated_rot[(i + 1) % 4], epsilon = 1e-12);
        }
    }
}
