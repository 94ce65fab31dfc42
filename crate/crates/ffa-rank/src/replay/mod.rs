//! Chronological replay: predict, score, update, one match at a time.
//!
//! For every match, in timestamp order: retrieve each player's rating (new
//! players get the system default), sort by rating to produce the predicted
//! ranking (ties broken by a seeded per-match shuffle), score the six
//! metrics against the observed ranking, then apply the system's update.
//! Predictions therefore never see the current match's outcome, and the
//! whole run is a pure function of `(matches, system, config, seed)`.

mod cohort;

pub use cohort::{
    binned_ranks, cohort_best, cohort_frequent, BinAccumulator, BinRow, BinTable, CohortCurves,
    CohortKind, CohortSpec, CurvePoint,
};

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::metrics::{self, NdcgWeighting};
use crate::model::{MatchRecord, OutcomeRow, PlayerId, RankOutcome, Rating};
use crate::ratings::RatingSystem;
use crate::rng::keyed_rng;
use crate::{Error, Result};

/// Everything the store remembers about a player who has appeared at least
/// once.
#[derive(Clone, Copy, Debug)]
pub struct StoredPlayer {
    pub rating: Rating,
    pub games_played: u64,
    /// Rank in the player's most recent match; `None` only for entries
    /// loaded from a snapshot, which does not carry it.
    pub last_observed_rank: Option<u32>,
}

/// Mutable per-player state of one replay. A player is new exactly when
/// absent.
#[derive(Clone, Debug, Default)]
pub struct RatingStore {
    players: HashMap<PlayerId, StoredPlayer>,
}

impl RatingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, player: &PlayerId) -> Option<&StoredPlayer> {
        self.players.get(player)
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlayerId, &StoredPlayer)> {
        self.players.iter()
    }

    /// Records one match result for a player.
    pub fn record_result(&mut self, player: PlayerId, rating: Rating, observed_rank: u32) {
        self.players
            .entry(player)
            .and_modify(|p| {
                p.rating = rating;
                p.games_played += 1;
                p.last_observed_rank = Some(observed_rank);
            })
            .or_insert(StoredPlayer {
                rating,
                games_played: 1,
                last_observed_rank: Some(observed_rank),
            });
    }

    /// Inserts a player restored from a snapshot.
    pub fn insert_loaded(&mut self, player: PlayerId, rating: Rating, games_played: u64) {
        self.players.insert(
            player,
            StoredPlayer {
                rating,
                games_played,
                last_observed_rank: None,
            },
        );
    }
}

/// Predicted ranks (and new-player flags) aligned with the match's entry
/// list.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub predicted_ranks: Vec<u32>,
    pub is_new: Vec<bool>,
}

/// Sorts the field by rating score, descending; runs of exactly equal
/// scores are shuffled by an RNG keyed on `(seed, match_id)`. Fields with
/// all-distinct scores consume no randomness at all.
pub fn predict_match(
    store: &RatingStore,
    record: &MatchRecord,
    system: &dyn RatingSystem,
    seed: u64,
) -> Prediction {
    let entries = record.entries();
    let n = entries.len();
    let field = record.field_size();
    let mut scores = Vec::with_capacity(n);
    let mut is_new = Vec::with_capacity(n);
    for e in entries {
        match store.get(&e.player) {
            Some(p) => {
                scores.push(system.score_for_sorting(&p.rating));
                is_new.push(false);
            }
            None => {
                scores.push(system.new_player_score(field));
                is_new.push(true);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut rng: Option<ChaCha8Rng> = None;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && scores[order[end]].total_cmp(&scores[order[start]]) == std::cmp::Ordering::Equal
        {
            end += 1;
        }
        if end - start > 1 {
            let rng =
                rng.get_or_insert_with(|| keyed_rng(seed, record.match_id().as_str()));
            order[start..end].shuffle(rng);
        }
        start = end;
    }

    let mut predicted_ranks = vec![0u32; n];
    for (position, &slot) in order.iter().enumerate() {
        predicted_ranks[slot] = position as u32 + 1;
    }
    Prediction {
        predicted_ranks,
        is_new,
    }
}

#[derive(Clone, Debug)]
pub struct ReplayConfig {
    pub seed: u64,
    /// Collect per-player contribution histories (required by the cohort
    /// analyses). Off by default; full-scale replays do not need them.
    pub collect_histories: bool,
    /// Contributions are kept only for each player's first this-many games.
    pub history_horizon: u32,
    pub weighting: NdcgWeighting,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        ReplayConfig {
            seed: 0,
            collect_histories: false,
            history_horizon: 100,
            weighting: NdcgWeighting::log2(),
        }
    }
}

/// One match's row in the metric time series.
#[derive(Clone, Debug)]
pub struct SeriesRow {
    /// 1-based position in the replayed sequence.
    pub match_index: u64,
    pub match_id: crate::model::MatchId,
    pub n_players: u32,
    pub fraction_known: f64,
    /// Metric values in [`metrics::MetricName::ALL`] order.
    pub values: [f64; 6],
}

/// Per-match metric values over a whole replay.
#[derive(Clone, Debug, Default)]
pub struct MetricSeries {
    pub rows: Vec<SeriesRow>,
}

impl MetricSeries {
    /// Mean of each metric over all matches.
    pub fn means(&self) -> [f64; 6] {
        self.means_in(0..self.rows.len())
    }

    /// Mean of each metric over a row range.
    pub fn means_in(&self, range: std::ops::Range<usize>) -> [f64; 6] {
        let slice = &self.rows[range];
        let mut sums = [0.0f64; 6];
        for row in slice {
            for (s, v) in sums.iter_mut().zip(row.values) {
                *s += v;
            }
        }
        sums.map(|s| s / slice.len() as f64)
    }

    /// Trailing moving average of the metric columns over up to `window`
    /// rows (including the current one). A window of 0 or 1 is the
    /// identity. Aggregations always run on the raw series; smoothing is
    /// for plotting only.
    pub fn smoothed(&self, window: usize) -> MetricSeries {
        if window <= 1 {
            return self.clone();
        }
        let mut rows = self.rows.clone();
        let mut sums = [0.0f64; 6];
        for (i, row) in rows.iter_mut().enumerate() {
            for (s, v) in sums.iter_mut().zip(self.rows[i].values) {
                *s += v;
            }
            if i >= window {
                for (s, v) in sums.iter_mut().zip(self.rows[i - window].values) {
                    *s -= v;
                }
            }
            let span = (i + 1).min(window) as f64;
            row.values = sums.map(|s| s / span);
        }
        MetricSeries { rows }
    }
}

/// One appearance of a tracked player: their own prediction error plus the
/// whole-match values of the three metrics that only exist at match level.
#[derive(Clone, Copy, Debug)]
pub struct GameContribution {
    pub error: u32,
    pub match_tau: f64,
    pub match_ap: f64,
    pub match_ndcg: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PlayerHistory {
    /// Total appearances, beyond the stored horizon.
    pub games: u64,
    /// Contributions for the first `history_horizon` games only.
    pub first_games: Vec<GameContribution>,
}

/// Per-player appearance histories collected during a replay.
#[derive(Clone, Debug, Default)]
pub struct Histories {
    map: HashMap<PlayerId, PlayerHistory>,
    horizon: u32,
}

impl Histories {
    fn new(horizon: u32) -> Self {
        Histories {
            map: HashMap::new(),
            horizon,
        }
    }

    fn record(&mut self, player: PlayerId, contribution: GameContribution) {
        let entry = self.map.entry(player).or_default();
        entry.games += 1;
        if entry.first_games.len() < self.horizon as usize {
            entry.first_games.push(contribution);
        }
    }

    pub fn get(&self, player: &PlayerId) -> Option<&PlayerHistory> {
        self.map.get(player)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlayerId, &PlayerHistory)> {
        self.map.iter()
    }
}

#[derive(Debug)]
pub struct ReplayResult {
    pub series: MetricSeries,
    pub store: RatingStore,
    pub histories: Histories,
}

/// Replays `matches` (which must already be chronologically ordered) under
/// one rating system.
pub fn replay(
    matches: &[MatchRecord],
    system: &dyn RatingSystem,
    cfg: &ReplayConfig,
) -> Result<ReplayResult> {
    replay_with(matches, system, cfg, |_| {})
}

/// [`replay`] with an observer invoked on every scored outcome, before the
/// rating update. Analyses that would be too large to buffer (e.g. rank
/// bins over a full log) hook in here.
pub fn replay_with(
    matches: &[MatchRecord],
    system: &dyn RatingSystem,
    cfg: &ReplayConfig,
    mut observer: impl FnMut(&RankOutcome),
) -> Result<ReplayResult> {
    let mut store = RatingStore::new();
    let mut histories = Histories::new(cfg.history_horizon);
    let mut rows = Vec::with_capacity(matches.len());

    for (index, record) in matches.iter().enumerate() {
        let context = |e: Error| Error::MatchContext {
            match_id: record.match_id().to_string(),
            source: Box::new(e),
        };
        let prediction = predict_match(&store, record, system, cfg.seed);
        let outcome_rows: Vec<OutcomeRow> = record
            .entries()
            .iter()
            .zip(&prediction.predicted_ranks)
            .zip(&prediction.is_new)
            .map(|((entry, &predicted_rank), &is_new_player)| OutcomeRow {
                player: entry.player.clone(),
                predicted_rank,
                observed_rank: entry.observed_rank,
                is_new_player,
            })
            .collect();
        let outcome =
            RankOutcome::new(record.match_id().clone(), outcome_rows).map_err(context)?;

        let pairs: Vec<(u32, u32)> = outcome
            .rows()
            .iter()
            .map(|r| (r.predicted_rank, r.observed_rank))
            .collect();
        let scored = metrics::evaluate_rows(&pairs, &cfg.weighting);
        let values = [
            scored.accuracy,
            scored.mae,
            scored.kendall_tau.expect("field has at least two players"),
            scored.mrr,
            scored.ap,
            scored.ndcg,
        ];
        rows.push(SeriesRow {
            match_index: index as u64 + 1,
            match_id: record.match_id().clone(),
            n_players: record.field_size(),
            fraction_known: outcome.fraction_known_players(),
            values,
        });

        observer(&outcome);

        if cfg.collect_histories {
            for row in outcome.rows() {
                let error = (i64::from(row.predicted_rank) - i64::from(row.observed_rank))
                    .unsigned_abs() as u32;
                histories.record(
                    row.player.clone(),
                    GameContribution {
                        error,
                        match_tau: values[2],
                        match_ap: values[4],
                        match_ndcg: values[5],
                    },
                );
            }
        }

        let pre_match: Vec<Rating> = record
            .entries()
            .iter()
            .map(|e| {
                store
                    .get(&e.player)
                    .map(|p| p.rating)
                    .unwrap_or_else(|| system.default_rating())
            })
            .collect();
        let observed: Vec<u32> = record.entries().iter().map(|e| e.observed_rank).collect();
        let post_match = system.update(&pre_match, &observed).map_err(context)?;
        for (entry, rating) in record.entries().iter().zip(post_match) {
            store.record_result(entry.player.clone(), rating, entry.observed_rank);
        }
    }

    Ok(ReplayResult {
        series: MetricSeries { rows },
        store,
        histories,
    })
}

/// One player's slice of an outcome: `(error, relevance, exact hit)`.
pub fn per_player_metric_contribution(
    outcome: &RankOutcome,
    player: &PlayerId,
) -> Result<(u32, f64, bool)> {
    outcome
        .rows()
        .iter()
        .find(|r| &r.player == player)
        .map(|r| {
            let error =
                (i64::from(r.predicted_rank) - i64::from(r.observed_rank)).unsigned_abs() as u32;
            (error, metrics::relevance(error), error == 0)
        })
        .ok_or_else(|| Error::PlayerNotInOutcome(player.to_string()))
}
