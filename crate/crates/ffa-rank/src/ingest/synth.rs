//! Synthetic match streams with known latent skills.
//!
//! Players carry a fixed latent skill drawn from `N(0, latent_skill_sd)`.
//! Each match samples a roster (new players entering at `new_player_rate`),
//! adds `N(0, performance_noise_sd)` performance noise and ranks by the
//! noisy performance, descending. Everything is a pure function of the
//! seed, so the stream doubles as an oracle: the latent table says what a
//! converged rating system should recover.

use std::io;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{MatchEntry, MatchId, MatchRecord, PlayerId};
use crate::rng::keyed_rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct SynthConfig {
    pub n_players: usize,
    pub n_matches: usize,
    pub players_per_match: usize,
    pub latent_skill_sd: f64,
    pub performance_noise_sd: f64,
    /// Probability that a roster slot is filled with a never-seen player
    /// while unseen players remain.
    pub new_player_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_players: 1000,
            n_matches: 5000,
            players_per_match: 10,
            latent_skill_sd: 1.0,
            performance_noise_sd: 0.5,
            new_player_rate: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.players_per_match < 2 {
            return Err(Error::InfeasibleSynth(format!(
                "players_per_match must be at least 2, got {}",
                self.players_per_match
            )));
        }
        if self.players_per_match > self.n_players {
            return Err(Error::InfeasibleSynth(format!(
                "players_per_match {} exceeds n_players {}",
                self.players_per_match, self.n_players
            )));
        }
        for (name, value) in [
            ("latent_skill_sd", self.latent_skill_sd),
            ("performance_noise_sd", self.performance_noise_sd),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InfeasibleSynth(format!(
                    "{name} must be non-negative and finite, got {value}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.new_player_rate) {
            return Err(Error::InfeasibleSynth(format!(
                "new_player_rate must be in [0, 1], got {}",
                self.new_player_rate
            )));
        }
        Ok(())
    }
}

/// Switches the stream to an injection regime after a warm-up: from match
/// `after_match` on, a `fresh_fraction` share of every roster is filled
/// with brand-new one-shot players that never return.
#[derive(Clone, Copy, Debug)]
pub struct InjectionSpec {
    pub after_match: usize,
    pub fresh_fraction: f64,
}

/// A generated match stream plus the hidden latent-skill table
/// (one row per player ever created, in creation order).
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub matches: Vec<MatchRecord>,
    pub latent_skills: Vec<(PlayerId, f64)>,
}

const EPOCH_BASE: i64 = 1_500_000_000;

fn player_id(index: usize) -> PlayerId {
    PlayerId::new(format!("p{index:06}"))
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    generate_synthetic_with_injection(cfg, None)
}

pub fn generate_synthetic_with_injection(
    cfg: &SynthConfig,
    injection: Option<InjectionSpec>,
) -> Result<SyntheticData> {
    cfg.validate()?;
    if let Some(spec) = injection {
        if !(0.0..=1.0).contains(&spec.fresh_fraction) {
            return Err(Error::InfeasibleSynth(format!(
                "fresh_fraction must be in [0, 1], got {}",
                spec.fresh_fraction
            )));
        }
    }
    let mut rng = keyed_rng(cfg.seed, "synthetic-match-stream");
    let latent_dist = Normal::new(0.0, cfg.latent_skill_sd)
        .map_err(|e| Error::InfeasibleSynth(e.to_string()))?;
    let noise_dist = Normal::new(0.0, cfg.performance_noise_sd)
        .map_err(|e| Error::InfeasibleSynth(e.to_string()))?;

    let mut latents: Vec<f64> = (0..cfg.n_players).map(|_| latent_dist.sample(&mut rng)).collect();
    let per_match = cfg.players_per_match;
    let mut seen: Vec<usize> = Vec::new();
    let mut next_unseen = 0usize;
    let mut matches = Vec::with_capacity(cfg.n_matches);
    let mut roster: Vec<usize> = Vec::with_capacity(per_match);

    for m in 0..cfg.n_matches {
        roster.clear();
        let injecting = injection.is_some_and(|spec| m >= spec.after_match);
        if injecting {
            let spec = injection.unwrap();
            let wanted_fresh = ((per_match as f64) * spec.fresh_fraction).round() as usize;
            let returning = (per_match - wanted_fresh.min(per_match)).min(seen.len());
            let fresh = per_match - returning;
            for j in 0..returning {
                let pick = rng.gen_range(j..seen.len());
                seen.swap(j, pick);
                roster.push(seen[j]);
            }
            for _ in 0..fresh {
                // One-shot players: sampled, used once, never added to the
                // returning pool.
                latents.push(latent_dist.sample(&mut rng));
                roster.push(latents.len() - 1);
            }
        } else {
            let mut wanted_new = if seen.is_empty() {
                per_match
            } else {
                (0..per_match).filter(|_| rng.gen_bool(cfg.new_player_rate)).count()
            };
            wanted_new = wanted_new.min(cfg.n_players - next_unseen);
            if seen.len() < per_match - wanted_new {
                wanted_new = per_match - seen.len();
            }
            if wanted_new > cfg.n_players - next_unseen {
                return Err(Error::InfeasibleSynth(format!(
                    "player pool exhausted at match {m}"
                )));
            }
            let returning = per_match - wanted_new;
            for j in 0..returning {
                let pick = rng.gen_range(j..seen.len());
                seen.swap(j, pick);
                roster.push(seen[j]);
            }
            for _ in 0..wanted_new {
                roster.push(next_unseen);
                seen.push(next_unseen);
                next_unseen += 1;
            }
        }

        let performances: Vec<f64> = roster
            .iter()
            .map(|&p| latents[p] + noise_dist.sample(&mut rng))
            .collect();
        let mut order: Vec<usize> = (0..per_match).collect();
        order.sort_by(|&a, &b| {
            performances[b]
                .partial_cmp(&performances[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut ranks = vec![0u32; per_match];
        for (position, &slot) in order.iter().enumerate() {
            ranks[slot] = position as u32 + 1;
        }
        let entries: Vec<MatchEntry> = roster
            .iter()
            .zip(&ranks)
            .map(|(&p, &rank)| MatchEntry {
                player: player_id(p),
                observed_rank: rank,
            })
            .collect();
        matches.push(MatchRecord::new(
            MatchId::new(format!("m{m:07}")),
            EPOCH_BASE + m as i64,
            entries,
        )?);
    }

    let latent_skills = latents
        .into_iter()
        .enumerate()
        .map(|(i, skill)| (player_id(i), skill))
        .collect();
    Ok(SyntheticData {
        matches,
        latent_skills,
    })
}

/// Sidecar table `(player_id, latent_skill)` for oracle tests.
pub fn write_latent_sidecar<W: io::Write>(
    writer: W,
    latent_skills: &[(PlayerId, f64)],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["player_id", "latent_skill"])?;
    for (player, skill) in latent_skills {
        wtr.write_record([player.as_str(), &format!("{skill}")])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            n_players: 50,
            n_matches: 200,
            players_per_match: 6,
            latent_skill_sd: 1.0,
            performance_noise_sd: 0.5,
            new_player_rate: 0.2,
            seed: 11,
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let a = generate_synthetic(&small_cfg()).unwrap();
        let b = generate_synthetic(&small_cfg()).unwrap();
        assert_eq!(a.matches, b.matches);
        assert_eq!(a.latent_skills, b.latent_skills);
        let mut cfg = small_cfg();
        cfg.seed = 12;
        let c = generate_synthetic(&cfg).unwrap();
        assert_ne!(a.matches, c.matches);
    }

    #[test]
    fn records_satisfy_core_invariants() {
        let data = generate_synthetic(&small_cfg()).unwrap();
        assert_eq!(data.matches.len(), 200);
        for rec in &data.matches {
            assert_eq!(rec.field_size(), 6);
        }
        // MatchRecord::new validated permutations and distinct players.
    }

    #[test]
    fn zero_noise_follows_latent_skill_exactly() {
        let cfg = SynthConfig {
            performance_noise_sd: 0.0,
            ..small_cfg()
        };
        let data = generate_synthetic(&cfg).unwrap();
        let latent: HashMap<_, _> = data.latent_skills.iter().cloned().collect();
        for rec in &data.matches {
            let mut by_rank: Vec<_> = rec.entries().to_vec();
            by_rank.sort_by_key(|e| e.observed_rank);
            for pair in by_rank.windows(2) {
                assert!(latent[&pair[0].player] >= latent[&pair[1].player]);
            }
        }
    }

    #[test]
    fn huge_noise_decorrelates_ranks_from_latent_order() {
        let cfg = SynthConfig {
            n_players: 200,
            n_matches: 1000,
            players_per_match: 10,
            latent_skill_sd: 1.0,
            performance_noise_sd: 1000.0,
            new_player_rate: 0.2,
            seed: 3,
        };
        let data = generate_synthetic(&cfg).unwrap();
        let latent: HashMap<_, _> = data.latent_skills.iter().cloned().collect();
        let mut total_tau = 0.0;
        for rec in &data.matches {
            let entries = rec.entries();
            let mut concordant = 0i64;
            let mut discordant = 0i64;
            for i in 0..entries.len() {
                for j in (i + 1)..entries.len() {
                    let latent_gap = latent[&entries[i].player] - latent[&entries[j].player];
                    let rank_gap =
                        i64::from(entries[i].observed_rank) - i64::from(entries[j].observed_rank);
                    // Lower rank = better, so concordance flips the sign.
                    if latent_gap.signum() as i64 * rank_gap.signum() < 0 {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
            total_tau += (concordant - discordant) as f64 / (concordant + discordant) as f64;
        }
        let mean_tau = total_tau / data.matches.len() as f64;
        assert!(mean_tau.abs() < 0.05, "mean tau {mean_tau} should be near 0");
    }

    #[test]
    fn new_player_rate_zero_stops_introductions_after_bootstrap() {
        let cfg = SynthConfig {
            new_player_rate: 0.0,
            ..small_cfg()
        };
        let data = generate_synthetic(&cfg).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (idx, rec) in data.matches.iter().enumerate() {
            for e in rec.entries() {
                if !seen.insert(e.player.clone()) {
                    continue;
                }
                assert_eq!(idx, 0, "player {} first appears after bootstrap", e.player);
            }
        }
    }

    #[test]
    fn injection_fills_with_one_shot_players() {
        let cfg = small_cfg();
        let spec = InjectionSpec {
            after_match: 100,
            fresh_fraction: 0.5,
        };
        let data = generate_synthetic_with_injection(&cfg, Some(spec)).unwrap();
        let mut seen = std::collections::HashSet::new();
        for rec in &data.matches[..100] {
            for e in rec.entries() {
                seen.insert(e.player.clone());
            }
        }
        for rec in &data.matches[100..] {
            let fresh = rec
                .entries()
                .iter()
                .filter(|e| !seen.contains(&e.player))
                .count();
            assert_eq!(fresh, 3, "match {} should carry 3 fresh players", rec.match_id());
            for e in rec.entries() {
                seen.insert(e.player.clone());
            }
        }
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let mut cfg = small_cfg();
        cfg.players_per_match = 51;
        assert!(matches!(
            generate_synthetic(&cfg),
            Err(Error::InfeasibleSynth(_))
        ));
        let mut cfg = small_cfg();
        cfg.new_player_rate = 1.5;
        assert!(generate_synthetic(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.players_per_match = 1;
        assert!(generate_synthetic(&cfg).is_err());
    }
}
