//! Cohort curves and rank-bin aggregation over a completed replay.
//!
//! The cohort analyses track selected players across their first games.
//! Accuracy, MAE and MRR curves average each member's own contribution
//! (hit flag, error, relevance) at their g-th appearance; Kendall's tau, AP
//! and NDCG only exist at match level, so the whole match's value is
//! attributed to every cohort member appearing in it.

use rand::Rng;

use crate::metrics::{evaluate_rows, MetricName, NdcgWeighting};
use crate::model::RankOutcome;
use crate::ratings::RatingSystem;
use crate::replay::{Histories, PlayerHistory, RatingStore};
use crate::rng::keyed_rng;

/// The four experimental set-ups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohortKind {
    All,
    Best,
    Frequent,
    Binned,
}

/// Selection parameters for a cohort or bin analysis.
#[derive(Clone, Copy, Debug)]
pub struct CohortSpec {
    pub kind: CohortKind,
    pub cohort_size: usize,
    /// Players must have played strictly more games than this.
    pub min_games: u64,
    /// Curves cover each member's first `horizon` games.
    pub horizon: u32,
    pub bins: u32,
    pub seed: u64,
}

impl CohortSpec {
    /// Top-rated players with more than 10 games, tracked over their first
    /// 10 games.
    pub fn best() -> Self {
        CohortSpec {
            kind: CohortKind::Best,
            cohort_size: 1000,
            min_games: 10,
            horizon: 10,
            bins: 5,
            seed: 0,
        }
    }

    /// Random players with more than 100 games, tracked over their first
    /// 100 games.
    pub fn frequent() -> Self {
        CohortSpec {
            kind: CohortKind::Frequent,
            cohort_size: 1000,
            min_games: 100,
            horizon: 100,
            bins: 5,
            seed: 0,
        }
    }
}

/// Mean and spread of one metric at one game index.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub game_index: u32,
    pub metric: MetricName,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Clone, Debug)]
pub struct CohortCurves {
    pub points: Vec<CurvePoint>,
    /// Players passing the games filter.
    pub eligible: usize,
    /// Cohort actually tracked (smaller when the pool is short).
    pub selected: usize,
}

struct Accumulator {
    sum: f64,
    sum_sq: f64,
    n: u64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: 0.0,
            sum_sq: 0.0,
            n: 0,
        }
    }

    fn push(&mut self, value: f64) {
        self.sum += value;
        self.sum_sq += value * value;
        self.n += 1;
    }

    fn finish(&self, game_index: u32, metric: MetricName) -> CurvePoint {
        let n = self.n as f64;
        let mean = self.sum / n;
        let stderr = if self.n >= 2 {
            let variance = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
            (variance / n).sqrt()
        } else {
            0.0
        };
        CurvePoint {
            game_index,
            metric,
            mean,
            stderr,
            n: self.n,
        }
    }
}

fn curves_for(members: &[&PlayerHistory], horizon: u32) -> Vec<CurvePoint> {
    let mut points = Vec::with_capacity(horizon as usize * 6);
    for g in 1..=horizon {
        let mut accumulators = [
            Accumulator::new(),
            Accumulator::new(),
            Accumulator::new(),
            Accumulator::new(),
            Accumulator::new(),
            Accumulator::new(),
        ];
        for history in members {
            let Some(c) = history.first_games.get(g as usize - 1) else {
                continue;
            };
            accumulators[0].push(if c.error == 0 { 1.0 } else { 0.0 });
            accumulators[1].push(f64::from(c.error));
            accumulators[2].push(c.match_tau);
            accumulators[3].push(crate::metrics::relevance(c.error));
            accumulators[4].push(c.match_ap);
            accumulators[5].push(c.match_ndcg);
        }
        for (acc, metric) in accumulators.iter().zip(MetricName::ALL) {
            points.push(acc.finish(g, metric));
        }
    }
    points
}

/// Curves for the top `cohort_size` players by the system's own final
/// ratings, among those with more than `min_games` games. Falls back to the
/// whole eligible pool (with a warning) when it is smaller than the cohort.
pub fn cohort_best(
    store: &RatingStore,
    histories: &Histories,
    system: &dyn RatingSystem,
    spec: &CohortSpec,
) -> CohortCurves {
    let mut eligible: Vec<_> = store
        .iter()
        .filter(|(_, p)| p.games_played > spec.min_games)
        .collect();
    eligible.sort_by(|(ida, a), (idb, b)| {
        system
            .score_for_sorting(&b.rating)
            .total_cmp(&system.score_for_sorting(&a.rating))
            .then_with(|| ida.cmp(idb))
    });
    let eligible_count = eligible.len();
    if eligible_count < spec.cohort_size {
        log::warn!(
            "best-players cohort: only {eligible_count} eligible players (< {})",
            spec.cohort_size
        );
    }
    let selected = eligible_count.min(spec.cohort_size);
    let members: Vec<&PlayerHistory> = eligible[..selected]
        .iter()
        .filter_map(|(id, _)| histories.get(id))
        .collect();
    CohortCurves {
        points: curves_for(&members, spec.horizon),
        eligible: eligible_count,
        selected,
    }
}

/// Curves for a seeded uniform sample of players with more than
/// `min_games` games.
pub fn cohort_frequent(histories: &Histories, spec: &CohortSpec) -> CohortCurves {
    let mut eligible: Vec<_> = histories
        .iter()
        .filter(|(_, h)| h.games > spec.min_games)
        .collect();
    eligible.sort_by_key(|entry| entry.0);
    let eligible_count = eligible.len();
    if eligible_count < spec.cohort_size {
        log::warn!(
            "frequent-players cohort: only {eligible_count} eligible players (< {})",
            spec.cohort_size
        );
    }
    let selected = eligible_count.min(spec.cohort_size);
    let mut rng = keyed_rng(spec.seed, "frequent-cohort");
    for j in 0..selected {
        let pick = rng.gen_range(j..eligible_count);
        eligible.swap(j, pick);
    }
    let members: Vec<&PlayerHistory> = eligible[..selected].iter().map(|(_, h)| *h).collect();
    CohortCurves {
        points: curves_for(&members, spec.horizon),
        eligible: eligible_count,
        selected,
    }
}

/// One `(bin, metric)` cell of the rank-bin table.
#[derive(Clone, Copy, Debug)]
pub struct BinRow {
    /// 1-based; bin 1 holds the best observed ranks.
    pub bin: u32,
    pub metric: MetricName,
    pub mean: f64,
    /// Matches contributing to this cell. Kendall's tau skips singleton
    /// bins, so its count can be lower.
    pub n: u64,
}

#[derive(Clone, Debug)]
pub struct BinTable {
    pub rows: Vec<BinRow>,
    pub matches_used: u64,
    /// Matches with fewer players than bins, skipped and counted.
    pub skipped_small: u64,
}

/// Streaming aggregator: feed each outcome as the replay produces it.
pub struct BinAccumulator {
    bins: u32,
    sums: Vec<[f64; 6]>,
    counts: Vec<[u64; 6]>,
    matches_used: u64,
    skipped_small: u64,
    weighting: NdcgWeighting,
}

impl BinAccumulator {
    pub fn new(bins: u32) -> Self {
        BinAccumulator {
            bins,
            sums: vec![[0.0; 6]; bins as usize],
            counts: vec![[0; 6]; bins as usize],
            matches_used: 0,
            skipped_small: 0,
            weighting: NdcgWeighting::log2(),
        }
    }

    pub fn add(&mut self, outcome: &RankOutcome) {
        let n = outcome.field_size();
        if n < self.bins {
            self.skipped_small += 1;
            return;
        }
        self.matches_used += 1;
        let mut by_observed: Vec<(u32, u32)> = outcome
            .rows()
            .iter()
            .map(|r| (r.observed_rank, r.predicted_rank))
            .collect();
        by_observed.sort_unstable();

        // Contiguous 20% groups by observed rank; remainder players go to
        // the earlier bins.
        let base = (n / self.bins) as usize;
        let remainder = (n % self.bins) as usize;
        let mut start = 0usize;
        for bin in 0..self.bins as usize {
            let size = base + usize::from(bin < remainder);
            let members = &by_observed[start..start + size];
            start += size;
            let mut pairs: Vec<(u32, u32)> = members.iter().map(|&(o, p)| (p, o)).collect();
            pairs.sort_unstable();
            let scored = evaluate_rows(&pairs, &self.weighting);
            let values = [
                Some(scored.accuracy),
                Some(scored.mae),
                scored.kendall_tau,
                Some(scored.mrr),
                Some(scored.ap),
                Some(scored.ndcg),
            ];
            for (slot, value) in values.iter().enumerate() {
                if let Some(v) = value {
                    self.sums[bin][slot] += v;
                    self.counts[bin][slot] += 1;
                }
            }
        }
    }

    pub fn finish(self) -> BinTable {
        let mut rows = Vec::with_capacity(self.bins as usize * 6);
        for bin in 0..self.bins as usize {
            for (slot, metric) in MetricName::ALL.iter().enumerate() {
                let n = self.counts[bin][slot];
                rows.push(BinRow {
                    bin: bin as u32 + 1,
                    metric: *metric,
                    mean: self.sums[bin][slot] / n as f64,
                    n,
                });
            }
        }
        BinTable {
            rows,
            matches_used: self.matches_used,
            skipped_small: self.skipped_small,
        }
    }
}

/// Per-bin metric means over a collection of outcomes.
pub fn binned_ranks<'a>(
    outcomes: impl IntoIterator<Item = &'a RankOutcome>,
    bins: u32,
) -> BinTable {
    let mut acc = BinAccumulator::new(bins);
    for outcome in outcomes {
        acc.add(outcome);
    }
    acc.finish()
}
