//! The naive baseline: predict whatever a player placed last time.

use super::RatingSystem;
use crate::model::Rating;
use crate::Result;

/// Predicted rank value for a player: their previous observed rank, or the
/// mid-field `N / 2` for players with no history. Real-valued; ties are
/// broken downstream by the replay's seeded tie-break.
pub fn previous_rank_predict(history_rank: Option<u32>, n: u32) -> f64 {
    debug_assert!(n >= 2);
    match history_rank {
        Some(rank) => f64::from(rank),
        None => f64::from(n) / 2.0,
    }
}

/// PreviousRank behind the uniform [`RatingSystem`] interface. The stored
/// "rating" is simply the player's last observed rank; sorting negates it
/// so the uniform descending sort yields ascending predicted ranks.
#[derive(Clone, Copy, Debug, Default)]
pub struct PreviousRankSystem;

impl RatingSystem for PreviousRankSystem {
    fn name(&self) -> &'static str {
        "previous_rank"
    }

    fn default_rating(&self) -> Rating {
        // Placeholder only: new players are scored via new_player_score and
        // updates ignore prior ratings, so this value never influences
        // predictions.
        Rating::point(0.0)
    }

    fn score_for_sorting(&self, rating: &Rating) -> f64 {
        -rating.mu
    }

    fn new_player_score(&self, field_size: u32) -> f64 {
        -previous_rank_predict(None, field_size)
    }

    fn update(&self, ratings: &[Rating], observed_ranks: &[u32]) -> Result<Vec<Rating>> {
        super::validate_field(ratings.len(), observed_ranks)?;
        Ok(observed_ranks
            .iter()
            .map(|&r| Rating::point(f64::from(r)))
            .collect())
    }
}
