//! Plot-ready delimited-text outputs with fixed column orders.
//!
//! * metric series: `match_index, match_id, n_players, fraction_known,
//!   accuracy, mae, kendall_tau, mrr, ap, ndcg`
//! * cohort curves: `game_index, metric, mean, stderr, n`
//! * bin table:     `bin, metric, mean, n`
//! * store snapshot: `player_id, mu, sigma, games_played` (round-trippable;
//!   `sigma` empty for systems that do not track one)
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! runs produce byte-identical files.

use std::io;

use crate::model::{PlayerId, Rating};
use crate::replay::{BinTable, CohortCurves, MetricSeries, RatingStore};
use crate::{Error, Result};

pub const SERIES_COLUMNS: [&str; 10] = [
    "match_index",
    "match_id",
    "n_players",
    "fraction_known",
    "accuracy",
    "mae",
    "kendall_tau",
    "mrr",
    "ap",
    "ndcg",
];

/// Writes the per-match metric series, optionally smoothed for plotting by
/// a trailing moving average.
pub fn write_series<W: io::Write>(
    writer: W,
    series: &MetricSeries,
    smoothing_window: Option<usize>,
) -> Result<()> {
    let smoothed;
    let rows = match smoothing_window {
        Some(window) if window > 1 => {
            smoothed = series.smoothed(window);
            &smoothed.rows
        }
        _ => &series.rows,
    };
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(SERIES_COLUMNS)?;
    for row in rows {
        let mut record = vec![
            row.match_index.to_string(),
            row.match_id.to_string(),
            row.n_players.to_string(),
            format!("{}", row.fraction_known),
        ];
        record.extend(row.values.iter().map(|v| format!("{v}")));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes cohort curves as `(game_index, metric, mean, stderr, n)`.
pub fn write_curves<W: io::Write>(writer: W, curves: &CohortCurves) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["game_index", "metric", "mean", "stderr", "n"])?;
    for p in &curves.points {
        wtr.write_record([
            p.game_index.to_string(),
            p.metric.to_string(),
            format!("{}", p.mean),
            format!("{}", p.stderr),
            p.n.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the rank-bin table as `(bin, metric, mean, n)`.
pub fn write_bin_table<W: io::Write>(writer: W, table: &BinTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["bin", "metric", "mean", "n"])?;
    for row in &table.rows {
        wtr.write_record([
            row.bin.to_string(),
            row.metric.to_string(),
            format!("{}", row.mean),
            row.n.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the rating store sorted by player id.
pub fn write_store_snapshot<W: io::Write>(writer: W, store: &RatingStore) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["player_id", "mu", "sigma", "games_played"])?;
    let mut players: Vec<_> = store.iter().collect();
    players.sort_by_key(|entry| entry.0);
    for (player, stored) in players {
        wtr.write_record([
            player.to_string(),
            format!("{}", stored.rating.mu),
            stored
                .rating
                .sigma
                .map(|s| format!("{s}"))
                .unwrap_or_default(),
            stored.games_played.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a snapshot written by [`write_store_snapshot`].
pub fn load_store_snapshot<R: io::Read>(reader: R) -> Result<RatingStore> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["player_id", "mu", "sigma", "games_played"];
    if headers.iter().ne(expected) {
        return Err(Error::MissingColumns(
            expected.iter().map(|s| s.to_string()).collect(),
        ));
    }
    let mut store = RatingStore::new();
    for row in rdr.records() {
        let row = row?;
        let parse = |idx: usize| -> Result<&str> {
            row.get(idx)
                .ok_or_else(|| Error::InvalidRating("short snapshot row".into()))
        };
        let player = PlayerId::new(parse(0)?);
        let mu: f64 = parse(1)?
            .parse()
            .map_err(|_| Error::InvalidRating(format!("bad mu for {player}")))?;
        let sigma_field = parse(2)?;
        let rating = if sigma_field.is_empty() {
            Rating::point(mu)
        } else {
            let sigma: f64 = sigma_field
                .parse()
                .map_err(|_| Error::InvalidRating(format!("bad sigma for {player}")))?;
            Rating::with_sigma(mu, sigma)
        };
        rating.validate()?;
        let games: u64 = parse(3)?
            .parse()
            .map_err(|_| Error::InvalidRating(format!("bad games_played for {player}")))?;
        store.insert_loaded(player, rating, games);
    }
    Ok(store)
}
