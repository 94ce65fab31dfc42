//! Match-log parsing: delimited text in, validated [`MatchRecord`]s out.
//!
//! The input is UTF-8 delimited text (comma by default) with a header row
//! naming at least `match_id`, `date`, `player_id`, `placement` and
//! `party_size`; extra columns are ignored. Only solo rows
//! (`party_size == 1`) are kept. Matches are grouped by id and sorted by
//! timestamp (ties by match id), and placements are repaired to a dense
//! `1..=N` permutation — ties broken by a seeded coin flip, gaps closed —
//! with every skip and repair counted in the report.

mod synth;

pub use synth::{
    generate_synthetic, generate_synthetic_with_injection, write_latent_sidecar, InjectionSpec,
    SynthConfig, SyntheticData,
};

use std::collections::{HashMap, HashSet};
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::model::{MatchEntry, MatchId, MatchRecord, PlayerId};
use crate::rng::keyed_rng;
use crate::{Error, Result};

pub const REQUIRED_COLUMNS: [&str; 5] = ["match_id", "date", "player_id", "placement", "party_size"];

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    pub delimiter: u8,
    /// Seed for the tie-repair coin flips, keyed per match id.
    pub seed: u64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            delimiter: b',',
            seed: 0,
        }
    }
}

/// Skip, repair and rejection counters for one parse. All counts are
/// deterministic for a given input and seed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub matches: usize,
    pub players: usize,
    pub rows_read: u64,
    pub rows_skipped_non_solo: u64,
    pub rows_unparseable: u64,
    pub matches_rejected: u64,
    pub matches_dropped_short: u64,
    pub matches_repaired: u64,
    pub ties_broken: u64,
    /// One line per rejected match, in input order.
    pub diagnostics: Vec<String>,
}

/// Accepts epoch seconds or a handful of common date-time layouts.
fn parse_timestamp(s: &str) -> Option<i64> {
    if let Ok(epoch) = s.parse::<i64>() {
        return Some(epoch);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    if let Ok(dt) = chrono::DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%z") {
        return Some(dt.timestamp());
    }
    if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Some(dt.and_utc().timestamp());
    }
    if let Ok(d) = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp());
    }
    None
}

struct MatchGroup {
    match_id: String,
    timestamp: i64,
    rows: Vec<(String, u32)>,
}

/// Assigns dense `1..=N` ranks from raw placements. Returns the rank per
/// row plus whether anything had to be repaired and how many ties were
/// broken by the seeded coin flip.
fn repair_placements(
    placements: &[u32],
    seed: u64,
    match_id: &str,
) -> (Vec<u32>, bool, u64) {
    let n = placements.len();
    let mut already_dense = vec![false; n];
    let dense = placements.iter().all(|&p| {
        p >= 1
            && (p as usize) <= n
            && !std::mem::replace(&mut already_dense[(p - 1) as usize], true)
    });
    if dense {
        return (placements.to_vec(), false, 0);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| placements[i]);
    let mut ties = 0u64;
    let mut rng = keyed_rng(seed, match_id);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && placements[order[end]] == placements[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            ties += (end - start - 1) as u64;
            order[start..end].shuffle(&mut rng);
        }
        start = end;
    }
    let mut ranks = vec![0u32; n];
    for (position, &row) in order.iter().enumerate() {
        ranks[row] = position as u32 + 1;
    }
    (ranks, true, ties)
}

/// Parses a match log from any reader. Returns records sorted by
/// `(timestamp, match_id)` together with the ingest report.
pub fn parse_match_log<R: io::Read>(
    reader: R,
    opts: &ParseOptions,
) -> Result<(Vec<MatchRecord>, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let mut columns = HashMap::new();
    for (idx, name) in headers.iter().enumerate() {
        columns.entry(name.to_string()).or_insert(idx);
    }
    let missing: Vec<String> = REQUIRED_COLUMNS
        .iter()
        .filter(|c| !columns.contains_key(**c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }
    let col = |name: &str| columns[name];
    let (c_match, c_date, c_player, c_place, c_party) = (
        col("match_id"),
        col("date"),
        col("player_id"),
        col("placement"),
        col("party_size"),
    );

    let mut report = IngestReport::default();
    let mut group_index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<MatchGroup> = Vec::new();

    for row in rdr.records() {
        report.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                report.rows_unparseable += 1;
                continue;
            }
        };
        let fields = (
            row.get(c_match),
            row.get(c_date),
            row.get(c_player),
            row.get(c_place),
            row.get(c_party),
        );
        let (Some(match_id), Some(date), Some(player), Some(placement), Some(party)) = fields
        else {
            report.rows_unparseable += 1;
            continue;
        };
        let (Ok(placement), Ok(party)) = (placement.parse::<u32>(), party.parse::<u32>()) else {
            report.rows_unparseable += 1;
            continue;
        };
        if match_id.is_empty() || player.is_empty() || placement < 1 {
            report.rows_unparseable += 1;
            continue;
        }
        let Some(timestamp) = parse_timestamp(date) else {
            report.rows_unparseable += 1;
            continue;
        };
        if party != 1 {
            report.rows_skipped_non_solo += 1;
            continue;
        }

        let idx = *group_index.entry(match_id.to_string()).or_insert_with(|| {
            groups.push(MatchGroup {
                match_id: match_id.to_string(),
                timestamp,
                rows: Vec::new(),
            });
            groups.len() - 1
        });
        groups[idx].rows.push((player.to_string(), placement));
    }

    let mut records = Vec::with_capacity(groups.len());
    let mut unique_players: HashSet<PlayerId> = HashSet::new();
    for group in groups {
        if group.rows.len() < 2 {
            report.matches_dropped_short += 1;
            continue;
        }
        let mut seen = HashSet::new();
        if let Some((dup, _)) = group.rows.iter().find(|(p, _)| !seen.insert(p.clone())) {
            report.matches_rejected += 1;
            let msg = format!("match {}: duplicate player {dup}", group.match_id);
            log::warn!("{msg}");
            report.diagnostics.push(msg);
            continue;
        }
        let placements: Vec<u32> = group.rows.iter().map(|&(_, p)| p).collect();
        let (ranks, repaired, ties) = repair_placements(&placements, opts.seed, &group.match_id);
        if repaired {
            report.matches_repaired += 1;
            report.ties_broken += ties;
        }
        let entries: Vec<MatchEntry> = group
            .rows
            .iter()
            .zip(&ranks)
            .map(|((player, _), &rank)| MatchEntry {
                player: PlayerId::new(player),
                observed_rank: rank,
            })
            .collect();
        for e in &entries {
            unique_players.insert(e.player.clone());
        }
        records.push(MatchRecord::new(
            MatchId::new(&group.match_id),
            group.timestamp,
            entries,
        )?);
    }

    records.sort_by(|a, b| {
        a.timestamp()
            .cmp(&b.timestamp())
            .then_with(|| a.match_id().as_str().cmp(b.match_id().as_str()))
    });
    report.matches = records.len();
    report.players = unique_players.len();
    Ok((records, report))
}

pub fn parse_match_log_path(
    path: impl AsRef<Path>,
    opts: &ParseOptions,
) -> Result<(Vec<MatchRecord>, IngestReport)> {
    let file = std::fs::File::open(path)?;
    parse_match_log(io::BufReader::new(file), opts)
}

/// Serializes records in the same shape the parser accepts (dates as epoch
/// seconds); re-parsing the output yields identical records.
pub fn write_match_log<W: io::Write>(
    writer: W,
    records: &[MatchRecord],
    delimiter: u8,
) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    wtr.write_record(REQUIRED_COLUMNS)?;
    for rec in records {
        for entry in rec.entries() {
            wtr.write_record([
                rec.match_id().as_str(),
                &rec.timestamp().to_string(),
                entry.player.as_str(),
                &entry.observed_rank.to_string(),
                "1",
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
