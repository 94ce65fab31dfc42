//! Glicko ratings extended to free-for-all fields.
//!
//! Glicko tracks a deviation alongside each skill estimate; matches shrink
//! the deviation and the deviation damps how much a result can move the
//! estimate. The free-for-all extension mirrors the Elo one: a field of `N`
//! is scored as `C(N,2)` pairwise comparisons with both the win probability
//! and the observed result normalized by the pair count. The single
//! opponent-deviation term of the two-player update becomes `g(sigma_F)`
//! where `sigma_F^2` is the mean of the opponents' squared deviations; for
//! `N = 2` this reduces exactly to the head-to-head form. Updates are
//! applied per match, not per rating period.

use std::f64::consts::PI;

use super::{pair_count, pairwise_sums, pairwise_sums_seq, validate_field, RatingSystem};
use crate::model::Rating;
use crate::{Error, Result};

/// Glicko hyperparameters. `q` is the scale constant `ln(10) / 400` from
/// the original system, fixed at its published value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlickoConfig {
    pub initial_mu: f64,
    pub initial_sigma: f64,
    pub q: f64,
}

impl Default for GlickoConfig {
    fn default() -> Self {
        GlickoConfig {
            initial_mu: 1500.0,
            initial_sigma: 350.0,
            q: 0.0057565,
        }
    }
}

impl GlickoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_sigma > 0.0) || !self.initial_sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "initial_sigma must be positive, got {}",
                self.initial_sigma
            )));
        }
        if !(self.q > 0.0) || !self.q.is_finite() {
            return Err(Error::InvalidConfig(format!("q must be positive, got {}", self.q)));
        }
        if !self.initial_mu.is_finite() {
            return Err(Error::InvalidConfig("initial_mu must be finite".into()));
        }
        Ok(())
    }
}

/// `g` evaluated on a squared deviation. Shared by every public path so the
/// `N = 2` free-for-all reduction is bit-identical to the head-to-head form.
#[inline]
fn g_of_sigma_sq(sigma_sq: f64, q: f64) -> f64 {
    1.0 / (1.0 + 3.0 * q * q * sigma_sq / (PI * PI)).sqrt()
}

/// Deviation damping `g(sigma) = 1 / sqrt(1 + 3 q^2 sigma^2 / pi^2)`;
/// 1 at zero deviation, strictly decreasing.
pub fn glicko_g(sigma: f64, q: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidRating(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidConfig(format!("q must be positive, got {q}")));
    }
    Ok(g_of_sigma_sq(sigma * sigma, q))
}

#[inline]
fn pair_prob(mu_i: f64, s2_i: f64, mu_j: f64, s2_j: f64, q: f64) -> f64 {
    let g = g_of_sigma_sq(s2_i + s2_j, q);
    1.0 / (1.0 + 10f64.powf(-g * (mu_i - mu_j) / 400.0))
}

fn split_ratings(ratings: &[Rating]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut mus = Vec::with_capacity(ratings.len());
    let mut s2 = Vec::with_capacity(ratings.len());
    for r in ratings {
        r.validate()?;
        let sigma = r.sigma_required()?;
        mus.push(r.mu);
        s2.push(sigma * sigma);
    }
    Ok((mus, s2))
}

/// Probability that `r_i` beats `r_j`, damped by both deviations.
pub fn glicko_win_prob(r_i: &Rating, r_j: &Rating, q: f64) -> Result<f64> {
    r_i.validate()?;
    r_j.validate()?;
    let s_i = r_i.sigma_required()?;
    let s_j = r_j.sigma_required()?;
    Ok(pair_prob(r_i.mu, s_i * s_i, r_j.mu, s_j * s_j, q))
}

fn win_probs_with<F>(ratings: &[Rating], q: f64, kernel: F) -> Result<Vec<f64>>
where
    F: FnOnce(&[f64], &[f64]) -> Vec<f64>,
{
    if ratings.len() < 2 {
        return Err(Error::FieldTooSmall(ratings.len()));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidConfig(format!("q must be positive, got {q}")));
    }
    let (mus, s2) = split_ratings(ratings)?;
    let c = pair_count(ratings.len() as u32);
    let mut sums = kernel(&mus, &s2);
    for s in &mut sums {
        *s /= c;
    }
    Ok(sums)
}

/// Overall win probability of every player in the field; sums to 1 up to
/// rounding.
pub fn glicko_ffa_win_probs(ratings: &[Rating], q: f64) -> Result<Vec<f64>> {
    win_probs_with(ratings, q, |mus, s2| {
        pairwise_sums(mus.len(), |i, j| pair_prob(mus[i], s2[i], mus[j], s2[j], q))
    })
}

/// Sequential variant of [`glicko_ffa_win_probs`], byte-identical to it.
pub fn glicko_ffa_win_probs_seq(ratings: &[Rating], q: f64) -> Result<Vec<f64>> {
    win_probs_with(ratings, q, |mus, s2| {
        pairwise_sums_seq(mus.len(), |i, j| pair_prob(mus[i], s2[i], mus[j], s2[j], q))
    })
}

/// Forced-parallel variant of [`glicko_ffa_win_probs`], byte-identical to it.
#[cfg(feature = "parallel")]
pub fn glicko_ffa_win_probs_par(ratings: &[Rating], q: f64) -> Result<Vec<f64>> {
    win_probs_with(ratings, q, |mus, s2| {
        super::pairwise_sums_par(mus.len(), |i, j| pair_prob(mus[i], s2[i], mus[j], s2[j], q))
    })
}

/// Overall win probability of the player at index `i`.
pub fn glicko_ffa_win_prob(ratings: &[Rating], i: usize, q: f64) -> Result<f64> {
    if i >= ratings.len() {
        return Err(Error::InvalidRating(format!(
            "player index {i} out of range for field of {}",
            ratings.len()
        )));
    }
    Ok(glicko_ffa_win_probs(ratings, q)?[i])
}

/// Estimation variance `d^2 = [q^2 g^2 p (1 - p)]^{-1}`. Degenerate win
/// probabilities (exactly 0 or 1) are rejected.
pub fn glicko_d_squared(p_win: f64, g_opp: f64, q: f64) -> Result<f64> {
    if !(p_win > 0.0 && p_win < 1.0) {
        return Err(Error::DegenerateProbability(p_win));
    }
    if !(g_opp > 0.0) || !g_opp.is_finite() {
        return Err(Error::InvalidRating(format!("g must be positive, got {g_opp}")));
    }
    Ok(1.0 / (q * q * g_opp * g_opp * p_win * (1.0 - p_win)))
}

/// Post-match ratings and deviations. Every deviation strictly shrinks;
/// the estimate moves up exactly when the normalized result beats the
/// predicted win probability.
pub fn glicko_ffa_update(
    ratings: &[Rating],
    observed_ranks: &[u32],
    cfg: &GlickoConfig,
) -> Result<Vec<Rating>> {
    cfg.validate()?;
    let n = validate_field(ratings.len(), observed_ranks)?;
    let probs = glicko_ffa_win_probs(ratings, cfg.q)?;
    let (mus, s2) = split_ratings(ratings)?;
    // Mean of the opponents' squared deviations, per player. Summed
    // pairwise (not total-minus-own) so N = 2 reduces bit-for-bit.
    let opp_s2_sums = pairwise_sums(ratings.len(), |_, j| s2[j]);
    let opponents = f64::from(n - 1);
    let mut out = Vec::with_capacity(ratings.len());
    for i in 0..ratings.len() {
        let g_field = g_of_sigma_sq(opp_s2_sums[i] / opponents, cfg.q);
        let d2 = glicko_d_squared(probs[i], g_field, cfg.q)?;
        let denom = 1.0 / s2[i] + 1.0 / d2;
        let r_prime = super::normalized_observed_result(observed_ranks[i], n)?;
        let mu = mus[i] + (cfg.q / denom) * (g_field * (r_prime - probs[i]));
        let sigma = (1.0 / denom).sqrt();
        out.push(Rating::with_sigma(mu, sigma));
    }
    Ok(out)
}

/// Glicko behind the uniform [`RatingSystem`] interface.
#[derive(Clone, Debug, Default)]
pub struct GlickoSystem {
    cfg: GlickoConfig,
}

impl GlickoSystem {
    pub fn new(cfg: GlickoConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(GlickoSystem { cfg })
    }

    pub fn config(&self) -> &GlickoConfig {
        &self.cfg
    }
}

impl RatingSystem for GlickoSystem {
    fn name(&self) -> &'static str {
        "glicko"
    }

    fn default_rating(&self) -> Rating {
        Rating::with_sigma(self.cfg.initial_mu, self.cfg.initial_sigma)
    }

    fn score_for_sorting(&self, rating: &Rating) -> f64 {
        rating.mu
    }

    fn update(&self, ratings: &[Rating], observed_ranks: &[u32]) -> Result<Vec<Rating>> {
        glicko_ffa_update(ratings, observed_ranks, &self.cfg)
    }
}
