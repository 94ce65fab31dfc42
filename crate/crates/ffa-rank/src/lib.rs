//! Skill-rating systems and rank-prediction evaluation for free-for-all matches.
//!
//! A free-for-all match pits `N` players against each other at once and ends
//! with a full placement ordering (rank 1 = winner). This crate provides:
//!
//! * four rating systems extended to free-for-all fields — Elo, Glicko,
//!   TrueSkill and a naive previous-rank baseline ([`ratings`]),
//! * six rank-prediction metrics — accuracy, MAE, Kendall's tau, MRR,
//!   average precision and NDCG ([`metrics`]),
//! * match-log parsing and synthetic match generation ([`ingest`]),
//! * a chronological replay harness with cohort and rank-bin analyses
//!   ([`replay`]) and plot-ready delimited-text reports ([`report`]).
//!
//! The pairwise probability kernels used by the Elo and Glicko free-for-all
//! updates are `O(N^2)` per match and run on rayon when the default
//! `parallel` feature is enabled; a sequential fallback is always compiled
//! and is used for small fields (and exclusively when the feature is off).

// Guard clauses are written `!(x > 0.0)` so NaN fails validation like any
// other out-of-range value.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ingest;
pub mod metrics;
pub mod model;
pub mod ratings;
pub mod replay;
pub mod report;

mod rng;

pub use model::{MatchId, MatchRecord, PlayerId, PredictionError, RankOutcome, Rating};
pub use ratings::{EloConfig, GlickoConfig, RatingSystem, SystemKind, TrueSkillConfig};

use thiserror::Error;

/// Errors produced by rating math, ingestion and replay.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rating input: {0}")]
    InvalidRating(String),

    #[error("field must contain at least two players, got {0}")]
    FieldTooSmall(usize),

    #[error("rating and rank lists are misaligned: {ratings} ratings vs {ranks} ranks")]
    MisalignedLists { ratings: usize, ranks: usize },

    #[error("observed rank {rank} out of range 1..={n}")]
    RankOutOfRange { rank: u32, n: u32 },

    #[error("observed ranks do not form a permutation of 1..={0}")]
    NotAPermutation(u32),

    #[error("rating is missing a deviation (sigma) required by this system")]
    MissingSigma,

    #[error("win probability {0} is degenerate (0 or 1): d^2 undefined")]
    DegenerateProbability(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid match {match_id}: {reason}")]
    InvalidMatch { match_id: String, reason: String },

    #[error("match {match_id}: {source}")]
    MatchContext {
        match_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("missing required columns: {0:?}")]
    MissingColumns(Vec<String>),

    #[error("infeasible synthetic configuration: {0}")]
    InfeasibleSynth(String),

    #[error("player {0} not present in outcome")]
    PlayerNotInOutcome(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
