//! TrueSkill ratings for free-for-all fields.
//!
//! The two-player closed form updates the winner by `(sigma^2 / c) * v(t/c)`
//! and shrinks both variances by the matching `w` factor. Fields larger than
//! two are handled by expectation propagation on the chain factor graph over
//! performance differences of consecutive finishers: messages sweep the
//! chain forward and backward until the difference marginals stop moving
//! (`max |delta mu| < ep_tolerance`) or `ep_max_sweeps` is hit. A one-pass
//! sequential application of the closed form over adjacent finishers is kept
//! behind [`TrueSkillSchedule::SequentialPairwise`] for comparison.
//!
//! Dynamics noise `tau^2` is added to every participant's variance at the
//! start of each match they play, which keeps converged ratings adaptive.

use super::{validate_field, RatingSystem};
use crate::model::Rating;
use crate::{Error, Result};

/// How an `N > 2` field is reduced to pairwise comparisons.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrueSkillSchedule {
    /// Chain expectation propagation over adjacent finishers (default).
    #[default]
    EpChain,
    /// One sequential pass of the two-player closed form over adjacent
    /// finishers; cheaper and order-biased, kept for comparison runs.
    SequentialPairwise,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrueSkillConfig {
    pub initial_mu: f64,
    pub initial_sigma: f64,
    /// Performance noise scale; the comparison variance of a pair is
    /// `2 beta^2` plus both skill variances.
    pub beta: f64,
    /// Per-match dynamics noise added to each participant's variance.
    pub tau: f64,
    /// Kept for interface completeness; draws are not modeled and any
    /// nonzero value is rejected.
    pub draw_probability: f64,
    pub schedule: TrueSkillSchedule,
    /// Convergence threshold on the chain's difference-marginal means.
    pub ep_tolerance: f64,
    pub ep_max_sweeps: u32,
}

impl Default for TrueSkillConfig {
    fn default() -> Self {
        TrueSkillConfig {
            initial_mu: 25.0,
            initial_sigma: 8.333,
            beta: 4.16,
            tau: 0.833,
            draw_probability: 0.0,
            schedule: TrueSkillSchedule::EpChain,
            ep_tolerance: 1e-6,
            ep_max_sweeps: 100,
        }
    }
}

impl TrueSkillConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.initial_sigma > 0.0) || !self.initial_sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "initial_sigma must be positive, got {}",
                self.initial_sigma
            )));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidConfig(format!("tau must be non-negative, got {}", self.tau)));
        }
        if self.draw_probability != 0.0 {
            return Err(Error::InvalidConfig(
                "draws are not modeled; draw_probability must be 0".into(),
            ));
        }
        if !(self.ep_tolerance > 0.0) || self.ep_max_sweeps == 0 {
            return Err(Error::InvalidConfig(
                "ep_tolerance must be positive and ep_max_sweeps at least 1".into(),
            ));
        }
        if !self.initial_mu.is_finite() {
            return Err(Error::InvalidConfig("initial_mu must be finite".into()));
        }
        Ok(())
    }
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Mean correction `v(x) = N(x) / Phi(x)` of a Gaussian truncated at zero.
/// Where `Phi` underflows, the Mills-ratio expansion `-x - 1/x + 2/x^3`
/// takes over; the switch sits far past the range where erfc is accurate.
pub fn trueskill_v(t_over_c: f64) -> f64 {
    let x = t_over_c;
    let phi = normal_cdf(x);
    if phi < 1e-290 {
        return -x - 1.0 / x + 2.0 / (x * x * x);
    }
    normal_pdf(x) / phi
}

/// Variance correction `w(x) = v(x) (v(x) + x)`, in `(0, 1)`.
pub fn trueskill_w(t_over_c: f64) -> f64 {
    let v = trueskill_v(t_over_c);
    v * (v + t_over_c)
}

/// Closed-form update on already dynamics-injected variances.
/// Returns `((mu, sigma^2) winner, (mu, sigma^2) loser)`.
fn pairwise_raw(mu_w: f64, s2_w: f64, mu_l: f64, s2_l: f64, beta: f64) -> ((f64, f64), (f64, f64)) {
    let c_sq = 2.0 * beta * beta + s2_w + s2_l;
    let c = c_sq.sqrt();
    let t = (mu_w - mu_l) / c;
    let v = trueskill_v(t);
    let w = trueskill_w(t);
    (
        (mu_w + s2_w / c * v, s2_w * (1.0 - s2_w / c_sq * w)),
        (mu_l - s2_l / c * v, s2_l * (1.0 - s2_l / c_sq * w)),
    )
}

/// Two-player update: winner's estimate rises, loser's falls, both
/// deviations shrink below their dynamics-injected values.
pub fn trueskill_pairwise_update(
    winner: &Rating,
    loser: &Rating,
    cfg: &TrueSkillConfig,
) -> Result<(Rating, Rating)> {
    cfg.validate()?;
    winner.validate()?;
    loser.validate()?;
    let s_w = winner.sigma_required()?;
    let s_l = loser.sigma_required()?;
    let tau_sq = cfg.tau * cfg.tau;
    let (w, l) = pairwise_raw(
        winner.mu,
        s_w * s_w + tau_sq,
        loser.mu,
        s_l * s_l + tau_sq,
        cfg.beta,
    );
    Ok((
        Rating::with_sigma(w.0, w.1.sqrt()),
        Rating::with_sigma(l.0, l.1.sqrt()),
    ))
}

/// Gaussian message in natural parameters: precision `pi` and
/// precision-adjusted mean `tau`. The zero message is the multiplicative
/// identity.
#[derive(Clone, Copy, Debug, Default)]
struct Gaussian {
    pi: f64,
    tau: f64,
}

impl Gaussian {
    fn from_mu_sigma_sq(mu: f64, sigma_sq: f64) -> Self {
        Gaussian {
            pi: 1.0 / sigma_sq,
            tau: mu / sigma_sq,
        }
    }

    fn mul(self, rhs: Gaussian) -> Self {
        Gaussian {
            pi: self.pi + rhs.pi,
            tau: self.tau + rhs.tau,
        }
    }

    fn div(self, rhs: Gaussian) -> Self {
        Gaussian {
            pi: self.pi - rhs.pi,
            tau: self.tau - rhs.tau,
        }
    }

    fn mean(self) -> f64 {
        if self.pi == 0.0 {
            0.0
        } else {
            self.tau / self.pi
        }
    }

    fn sigma_sq(self) -> f64 {
        1.0 / self.pi
    }
}

/// Chain factor graph state, players indexed in finish order (0 = winner).
/// Difference factor `k` ties performance `k` (+1) to performance `k + 1`
/// (-1) through a greater-than-zero truncation.
struct Chain {
    skill_to_perf: Vec<Gaussian>,
    to_left: Vec<Gaussian>,
    to_right: Vec<Gaussian>,
    to_diff: Vec<Gaussian>,
    trunc_to_diff: Vec<Gaussian>,
}

impl Chain {
    fn new(mus: &[f64], sigma_sqs: &[f64], beta: f64) -> Self {
        let n = mus.len();
        let beta_sq = beta * beta;
        Chain {
            skill_to_perf: (0..n)
                .map(|k| Gaussian::from_mu_sigma_sq(mus[k], sigma_sqs[k] + beta_sq))
                .collect(),
            to_left: vec![Gaussian::default(); n - 1],
            to_right: vec![Gaussian::default(); n - 1],
            to_diff: vec![Gaussian::default(); n - 1],
            trunc_to_diff: vec![Gaussian::default(); n - 1],
        }
    }

    fn perf_marginal(&self, k: usize) -> Gaussian {
        let mut g = self.skill_to_perf[k];
        if k >= 1 {
            g = g.mul(self.to_right[k - 1]);
        }
        if k < self.to_left.len() {
            g = g.mul(self.to_left[k]);
        }
        g
    }

    /// Message from difference factor `k` into its difference variable,
    /// built from the two performance cavities.
    fn diff_down(&mut self, k: usize) {
        let left = self.perf_marginal(k).div(self.to_left[k]);
        let right = self.perf_marginal(k + 1).div(self.to_right[k]);
        let pi = 1.0 / (1.0 / left.pi + 1.0 / right.pi);
        let mean = left.mean() - right.mean();
        self.to_diff[k] = Gaussian { pi, tau: pi * mean };
    }

    /// Moment-match the difference marginal against the positivity
    /// constraint; returns how far its mean moved.
    fn trunc_up(&mut self, k: usize) -> f64 {
        let cavity = self.to_diff[k];
        let old = cavity.mul(self.trunc_to_diff[k]);
        let sqrt_pi = cavity.pi.sqrt();
        let x = cavity.tau / sqrt_pi;
        let v = trueskill_v(x);
        let w = trueskill_w(x);
        let keep = 1.0 - w;
        let matched = Gaussian {
            pi: cavity.pi / keep,
            tau: (cavity.tau + sqrt_pi * v) / keep,
        };
        self.trunc_to_diff[k] = matched.div(cavity);
        (matched.mean() - old.mean()).abs()
    }

    /// Message from difference factor `k` back into performance `k`.
    fn diff_up_left(&mut self, k: usize) {
        let diff_cavity = self.trunc_to_diff[k];
        let right = self.perf_marginal(k + 1).div(self.to_right[k]);
        let pi = 1.0 / (1.0 / diff_cavity.pi + 1.0 / right.pi);
        let mean = diff_cavity.mean() + right.mean();
        self.to_left[k] = Gaussian { pi, tau: pi * mean };
    }

    /// Message from difference factor `k` back into performance `k + 1`.
    fn diff_up_right(&mut self, k: usize) {
        let diff_cavity = self.trunc_to_diff[k];
        let left = self.perf_marginal(k).div(self.to_left[k]);
        let pi = 1.0 / (1.0 / diff_cavity.pi + 1.0 / left.pi);
        let mean = left.mean() - diff_cavity.mean();
        self.to_right[k] = Gaussian { pi, tau: pi * mean };
    }
}

/// EP over the finish-order chain. Takes dynamics-injected variances in
/// finish order, returns posterior `(mu, sigma^2)` in the same order.
fn ep_chain(
    mus: &[f64],
    sigma_sqs: &[f64],
    beta: f64,
    tolerance: f64,
    max_sweeps: u32,
) -> Vec<(f64, f64)> {
    let n = mus.len();
    let factors = n - 1;
    let mut chain = Chain::new(mus, sigma_sqs, beta);

    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut delta = 0.0f64;
        if factors == 1 {
            chain.diff_down(0);
            delta = chain.trunc_up(0);
        } else {
            for k in 0..factors - 1 {
                chain.diff_down(k);
                delta = delta.max(chain.trunc_up(k));
                chain.diff_up_right(k);
            }
            for k in (1..factors).rev() {
                chain.diff_down(k);
                delta = delta.max(chain.trunc_up(k));
                chain.diff_up_left(k);
            }
        }
        if delta < tolerance || sweeps >= max_sweeps {
            break;
        }
    }
    chain.diff_up_left(0);
    chain.diff_up_right(factors - 1);

    let beta_sq = beta * beta;
    (0..n)
        .map(|k| {
            let cavity = chain.perf_marginal(k).div(chain.skill_to_perf[k]);
            let damp = 1.0 / (1.0 + beta_sq * cavity.pi);
            let perf_to_skill = Gaussian {
                pi: damp * cavity.pi,
                tau: damp * cavity.tau,
            };
            let posterior = Gaussian::from_mu_sigma_sq(mus[k], sigma_sqs[k]).mul(perf_to_skill);
            (posterior.mean(), posterior.sigma_sq())
        })
        .collect()
}

/// N-player update: dynamics injection, then the configured schedule over
/// the finish-order chain. For `N = 2` both schedules equal the closed
/// two-player form.
pub fn trueskill_ffa_update(
    ratings: &[Rating],
    observed_ranks: &[u32],
    cfg: &TrueSkillConfig,
) -> Result<Vec<Rating>> {
    cfg.validate()?;
    validate_field(ratings.len(), observed_ranks)?;
    let n = ratings.len();
    let tau_sq = cfg.tau * cfg.tau;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| observed_ranks[i]);
    let mut mus = Vec::with_capacity(n);
    let mut s2 = Vec::with_capacity(n);
    for &i in &order {
        ratings[i].validate()?;
        let sigma = ratings[i].sigma_required()?;
        mus.push(ratings[i].mu);
        s2.push(sigma * sigma + tau_sq);
    }

    let posterior = match cfg.schedule {
        TrueSkillSchedule::EpChain => {
            ep_chain(&mus, &s2, cfg.beta, cfg.ep_tolerance, cfg.ep_max_sweeps)
        }
        TrueSkillSchedule::SequentialPairwise => {
            let mut state: Vec<(f64, f64)> = mus.iter().copied().zip(s2.iter().copied()).collect();
            for k in 0..n - 1 {
                let (w, l) = pairwise_raw(state[k].0, state[k].1, state[k + 1].0, state[k + 1].1, cfg.beta);
                state[k] = w;
                state[k + 1] = l;
            }
            state
        }
    };

    let mut out = vec![Rating::point(0.0); n];
    for (slot, &(mu, sigma_sq)) in order.iter().zip(&posterior) {
        out[*slot] = Rating::with_sigma(mu, sigma_sq.sqrt());
    }
    Ok(out)
}

/// TrueSkill behind the uniform [`RatingSystem`] interface.
#[derive(Clone, Debug, Default)]
pub struct TrueSkillSystem {
    cfg: TrueSkillConfig,
}

impl TrueSkillSystem {
    pub fn new(cfg: TrueSkillConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(TrueSkillSystem { cfg })
    }

    pub fn config(&self) -> &TrueSkillConfig {
        &self.cfg
    }
}

impl RatingSystem for TrueSkillSystem {
    fn name(&self) -> &'static str {
        "trueskill"
    }

    fn default_rating(&self) -> Rating {
        Rating::with_sigma(self.cfg.initial_mu, self.cfg.initial_sigma)
    }

    fn score_for_sorting(&self, rating: &Rating) -> f64 {
        rating.mu
    }

    fn update(&self, ratings: &[Rating], observed_ranks: &[u32]) -> Result<Vec<Rating>> {
        trueskill_ffa_update(ratings, observed_ranks, &self.cfg)
    }
}
