//! The four rating systems behind one uniform interface.
//!
//! Elo, Glicko and TrueSkill keep per-player skill estimates and update them
//! from match outcomes; `PreviousRank` is the naive baseline that predicts a
//! player's last observed rank. All update operations are pure functions of
//! the pre-match ratings — every player in a match is updated from the same
//! snapshot, never sequentially mutated, so results do not depend on player
//! list order.

mod elo;
mod glicko;
mod previous_rank;
mod trueskill;

pub use elo::{
    elo_ffa_update, elo_ffa_win_prob, elo_ffa_win_probs, elo_ffa_win_probs_seq, elo_win_prob,
    normalized_observed_result, EloConfig, EloSystem,
};
#[cfg(feature = "parallel")]
pub use elo::elo_ffa_win_probs_par;
pub use glicko::{
    glicko_d_squared, glicko_ffa_update, glicko_ffa_win_prob, glicko_ffa_win_probs,
    glicko_ffa_win_probs_seq, glicko_g, glicko_win_prob, GlickoConfig, GlickoSystem,
};
#[cfg(feature = "parallel")]
pub use glicko::glicko_ffa_win_probs_par;
pub use previous_rank::{previous_rank_predict, PreviousRankSystem};
pub use trueskill::{
    trueskill_ffa_update, trueskill_pairwise_update, trueskill_v, trueskill_w, TrueSkillConfig,
    TrueSkillSchedule, TrueSkillSystem,
};

use std::fmt;
use std::str::FromStr;

use crate::model::Rating;
use crate::{Error, Result};

/// Uniform facade over the four systems, as used by the replay harness.
///
/// `update` must be a pure function of its inputs with the output list
/// aligned to the input list.
pub trait RatingSystem: Send + Sync {
    fn name(&self) -> &'static str;

    /// Rating assigned to a player never seen before.
    fn default_rating(&self) -> Rating;

    /// Sort key for rank prediction: higher score means predicted to finish
    /// better. For `PreviousRank` this is the negated previous rank, which
    /// makes the uniform descending sort equal its ascending-by-rank order.
    fn score_for_sorting(&self, rating: &Rating) -> f64;

    /// Sort key for a player with no rating yet. Field size matters only to
    /// `PreviousRank`, whose new players predict the mid-field rank `N/2`.
    fn new_player_score(&self, field_size: u32) -> f64 {
        let _ = field_size;
        self.score_for_sorting(&self.default_rating())
    }

    /// Post-match ratings from pre-match ratings and observed ranks.
    fn update(&self, ratings: &[Rating], observed_ranks: &[u32]) -> Result<Vec<Rating>>;
}

/// Selects one of the four rating systems with its default configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Elo,
    Glicko,
    TrueSkill,
    PreviousRank,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::Elo,
        SystemKind::Glicko,
        SystemKind::TrueSkill,
        SystemKind::PreviousRank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Elo => "elo",
            SystemKind::Glicko => "glicko",
            SystemKind::TrueSkill => "trueskill",
            SystemKind::PreviousRank => "previous_rank",
        }
    }

    /// Builds the system with default hyperparameters.
    pub fn system(self) -> Box<dyn RatingSystem> {
        match self {
            SystemKind::Elo => Box::new(EloSystem::default()),
            SystemKind::Glicko => Box::new(GlickoSystem::default()),
            SystemKind::TrueSkill => Box::new(TrueSkillSystem::default()),
            SystemKind::PreviousRank => Box::new(PreviousRankSystem),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elo" => Ok(SystemKind::Elo),
            "glicko" => Ok(SystemKind::Glicko),
            "trueskill" => Ok(SystemKind::TrueSkill),
            "previous_rank" => Ok(SystemKind::PreviousRank),
            other => Err(Error::InvalidConfig(format!("unknown rating system {other:?}"))),
        }
    }
}

/// Number of unordered pairs in a field of `n`, as a float.
#[inline]
pub(crate) fn pair_count(n: u32) -> f64 {
    (u64::from(n) * u64::from(n - 1) / 2) as f64
}

/// Checks list alignment, the minimum field size and that `observed_ranks`
/// is a permutation of `1..=N`.
pub(crate) fn validate_field(ratings_len: usize, observed_ranks: &[u32]) -> Result<u32> {
    if ratings_len != observed_ranks.len() {
        return Err(Error::MisalignedLists {
            ratings: ratings_len,
            ranks: observed_ranks.len(),
        });
    }
    if ratings_len < 2 {
        return Err(Error::FieldTooSmall(ratings_len));
    }
    let n = ratings_len as u32;
    let mut seen = vec![false; ratings_len];
    for &r in observed_ranks {
        if r < 1 || r > n {
            return Err(Error::RankOutOfRange { rank: r, n });
        }
        if std::mem::replace(&mut seen[(r - 1) as usize], true) {
            return Err(Error::NotAPermutation(n));
        }
    }
    Ok(n)
}

/// Fields at least this large dispatch their `O(N^2)` pairwise kernels to
/// rayon; below it the sequential loop wins on overhead (measured crossover
/// between 100 and 512 players on small desktops, see benches/parallel.rs).
#[cfg(feature = "parallel")]
const PAR_MIN_FIELD: usize = 256;

/// For each `i`, the sum of `pair(i, j)` over `j != i`, accumulated in
/// ascending `j` order so the sequential and parallel paths produce
/// identical bytes.
pub(crate) fn pairwise_sums_seq<F>(n: usize, pair: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64,
{
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| pair(i, j)).sum())
        .collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn pairwise_sums_par<F>(n: usize, pair: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|i| (0..n).filter(|&j| j != i).map(|j| pair(i, j)).sum())
        .collect()
}

pub(crate) fn pairwise_sums<F>(n: usize, pair: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    if n >= PAR_MIN_FIELD {
        return pairwise_sums_par(n, pair);
    }
    pairwise_sums_seq(n, pair)
}
