//! Shared domain types: players, ratings, matches and rank outcomes.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

macro_rules! string_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: impl AsRef<str>) -> Self {
                Self(Arc::from(id.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }
    };
}

string_id!(
    /// Opaque player identifier as found in the match log. Equality is exact
    /// string equality; the token is shared, so clones are cheap.
    PlayerId
);

string_id!(
    /// Opaque match identifier.
    MatchId
);

/// A player's skill estimate: a point estimate `mu` plus, for systems that
/// track uncertainty (Glicko, TrueSkill), a strictly positive deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rating {
    pub mu: f64,
    pub sigma: Option<f64>,
}

impl Rating {
    pub fn point(mu: f64) -> Self {
        Rating { mu, sigma: None }
    }

    pub fn with_sigma(mu: f64, sigma: f64) -> Self {
        debug_assert!(sigma > 0.0);
        Rating {
            mu,
            sigma: Some(sigma),
        }
    }

    /// The deviation, or an error for systems that require one.
    pub fn sigma_required(&self) -> Result<f64> {
        self.sigma.ok_or(Error::MissingSigma)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::InvalidRating(format!("mu {} is not finite", self.mu)));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidRating(format!("sigma {s} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// One player's row in a finished match.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchEntry {
    pub player: PlayerId,
    /// 1-based placement; 1 is the winner.
    pub observed_rank: u32,
}

/// One free-for-all match: at least two distinct players whose observed
/// ranks form a permutation of `1..=N`. Entry order is preserved as given
/// (it carries no meaning for the math, but keeps replays deterministic).
#[derive(Clone, Debug, PartialEq)]
pub struct MatchRecord {
    match_id: MatchId,
    /// Epoch seconds; matches are replayed in ascending timestamp order.
    timestamp: i64,
    entries: Vec<MatchEntry>,
}

/// Checks that `ranks` is a permutation of `1..=n`.
fn is_permutation(ranks: impl Iterator<Item = u32>, n: u32) -> bool {
    let mut seen = vec![false; n as usize];
    let mut count = 0u32;
    for r in ranks {
        if r < 1 || r > n || seen[(r - 1) as usize] {
            return false;
        }
        seen[(r - 1) as usize] = true;
        count += 1;
    }
    count == n
}

impl MatchRecord {
    pub fn new(match_id: MatchId, timestamp: i64, entries: Vec<MatchEntry>) -> Result<Self> {
        let n = entries.len();
        if n < 2 {
            return Err(Error::InvalidMatch {
                match_id: match_id.to_string(),
                reason: format!("needs at least 2 players, got {n}"),
            });
        }
        let mut players: Vec<&PlayerId> = entries.iter().map(|e| &e.player).collect();
        players.sort_unstable();
        if players.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMatch {
                match_id: match_id.to_string(),
                reason: "duplicate player".into(),
            });
        }
        if !is_permutation(entries.iter().map(|e| e.observed_rank), n as u32) {
            return Err(Error::InvalidMatch {
                match_id: match_id.to_string(),
                reason: format!("observed ranks are not a permutation of 1..={n}"),
            });
        }
        Ok(MatchRecord {
            match_id,
            timestamp,
            entries,
        })
    }

    pub fn match_id(&self) -> &MatchId {
        &self.match_id
    }

    pub fn timestamp(&self) -> i64 {
        self.timestamp
    }

    pub fn entries(&self) -> &[MatchEntry] {
        &self.entries
    }

    /// Number of players in the field.
    pub fn field_size(&self) -> u32 {
        self.entries.len() as u32
    }
}

/// One player's row in a scored match: predicted vs observed rank.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeRow {
    pub player: PlayerId,
    pub predicted_rank: u32,
    pub observed_rank: u32,
    /// True when the player had no rating at prediction time.
    pub is_new_player: bool,
}

/// Aligned predicted-vs-observed ranks for one match, the unit every metric
/// consumes. Rows are kept sorted by predicted rank, so row index `i`
/// (0-based) is list position `i + 1` in the metric definitions.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOutcome {
    match_id: MatchId,
    rows: Vec<OutcomeRow>,
}

impl RankOutcome {
    pub fn new(match_id: MatchId, mut rows: Vec<OutcomeRow>) -> Result<Self> {
        let n = rows.len() as u32;
        if n < 2 {
            return Err(Error::FieldTooSmall(rows.len()));
        }
        if !is_permutation(rows.iter().map(|r| r.predicted_rank), n)
            || !is_permutation(rows.iter().map(|r| r.observed_rank), n)
        {
            return Err(Error::NotAPermutation(n));
        }
        rows.sort_by_key(|r| r.predicted_rank);
        Ok(RankOutcome { match_id, rows })
    }

    pub fn match_id(&self) -> &MatchId {
        &self.match_id
    }

    /// Rows in predicted-rank order.
    pub fn rows(&self) -> &[OutcomeRow] {
        &self.rows
    }

    pub fn field_size(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn fraction_known_players(&self) -> f64 {
        let known = self.rows.iter().filter(|r| !r.is_new_player).count();
        known as f64 / self.rows.len() as f64
    }
}

/// Absolute difference between a player's predicted and observed rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PredictionError(pub u32);

impl PredictionError {
    pub fn between(predicted_rank: u32, observed_rank: u32) -> Self {
        PredictionError((i64::from(predicted_rank) - i64::from(observed_rank)).unsigned_abs() as u32)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// Per-player prediction errors, ordered by predicted rank.
pub fn errors_of(outcome: &RankOutcome) -> Vec<PredictionError> {
    outcome
        .rows()
        .iter()
        .map(|r| PredictionError::between(r.predicted_rank, r.observed_rank))
        .collect()
}

#[cfg(test)]
pub(crate) fn outcome_from_ranks(pred: &[u32], obs: &[u32]) -> RankOutcome {
    let rows = pred
        .iter()
        .zip(obs)
        .enumerate()
        .map(|(i, (&p, &o))| OutcomeRow {
            player: PlayerId::new(format!("p{i}")),
            predicted_rank: p,
            observed_rank: o,
            is_new_player: false,
        })
        .collect();
    RankOutcome::new(MatchId::new("m"), rows).unwrap()
}
