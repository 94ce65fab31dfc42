//! Command-line front end: ingest -> replay -> analyses.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ffa_rank::ingest::{
    generate_synthetic, parse_match_log_path, write_latent_sidecar, write_match_log, ParseOptions,
    SynthConfig,
};
use ffa_rank::ratings::{
    EloConfig, EloSystem, GlickoSystem, PreviousRankSystem, RatingSystem, SystemKind,
    TrueSkillConfig, TrueSkillSystem,
};
use ffa_rank::replay::{
    cohort_best, cohort_frequent, replay, replay_with, BinAccumulator, BinTable, CohortCurves,
    CohortKind, CohortSpec, ReplayConfig, ReplayResult,
};
use ffa_rank::report;

#[derive(Parser)]
#[command(
    name = "ffa-rank",
    version,
    about = "Rate free-for-all matches and evaluate rank predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a match log chronologically and report the six metrics.
    Replay(ReplayArgs),
    /// Parse a match log and report skip/repair counters.
    Validate(ValidateArgs),
    /// Generate a synthetic match log plus a latent-skill sidecar.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SystemArg {
    Elo,
    Glicko,
    Trueskill,
    PreviousRank,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SetupArg {
    AllPlayers,
    Best,
    Frequent,
    Binned,
}

#[derive(Args)]
struct SynthParams {
    /// Synthetic pool size.
    #[arg(long, default_value_t = 1000)]
    players: usize,
    /// Number of synthetic matches.
    #[arg(long, default_value_t = 5000)]
    matches: usize,
    /// Players per synthetic match.
    #[arg(long, default_value_t = 10)]
    per_match: usize,
    /// Latent skill standard deviation.
    #[arg(long, default_value_t = 1.0)]
    skill_sd: f64,
    /// Per-match performance noise standard deviation.
    #[arg(long, default_value_t = 0.5)]
    noise_sd: f64,
    /// Probability a roster slot introduces a never-seen player.
    #[arg(long, default_value_t = 0.1)]
    new_player_rate: f64,
}

impl SynthParams {
    fn config(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            n_players: self.players,
            n_matches: self.matches,
            players_per_match: self.per_match,
            latent_skill_sd: self.skill_sd,
            performance_noise_sd: self.noise_sd,
            new_player_rate: self.new_player_rate,
            seed,
        }
    }
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    let bytes = s.as_bytes();
    match bytes.len() {
        1 => Ok(bytes[0]),
        2 if s == "\\t" => Ok(b'\t'),
        _ => Err(format!("delimiter must be a single byte, got {s:?}")),
    }
}

#[derive(Args)]
struct ReplayArgs {
    /// Match log to replay (header row required).
    #[arg(long, required_unless_present = "synth", conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// Replay a generated synthetic stream instead of a file.
    #[arg(long)]
    synth: bool,
    #[command(flatten)]
    synth_params: SynthParams,
    /// Field delimiter of the input log.
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Rating system to evaluate.
    #[arg(long, value_enum, default_value_t = SystemArg::All)]
    system: SystemArg,
    /// Experimental set-up.
    #[arg(long, value_enum, default_value_t = SetupArg::AllPlayers)]
    setup: SetupArg,
    /// Single source of all randomness (tie breaks, sampling, synthesis).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for report files.
    #[arg(long)]
    out: PathBuf,
    /// Trailing moving-average window applied to the emitted series
    /// (plotting only; aggregations always use the raw series).
    #[arg(long)]
    window: Option<usize>,
    /// Elo override: per-match points scale K.
    #[arg(long)]
    k: Option<f64>,
    /// Elo override: rating-difference scale D.
    #[arg(long)]
    d: Option<f64>,
    /// TrueSkill override: performance noise beta.
    #[arg(long)]
    beta: Option<f64>,
    /// TrueSkill override: dynamics noise tau.
    #[arg(long)]
    tau_dynamics: Option<f64>,
    /// Cohort size for the best/frequent set-ups.
    #[arg(long)]
    cohort_size: Option<usize>,
    /// Players must exceed this game count to join a cohort.
    #[arg(long)]
    min_games: Option<u64>,
    /// Games tracked per cohort member.
    #[arg(long)]
    horizon: Option<u32>,
    /// Number of observed-rank bins.
    #[arg(long, default_value_t = 5)]
    bins: u32,
    /// Also write a rating-store snapshot per system.
    #[arg(long)]
    emit_store: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Seed for the tie-repair coin flips.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// Output path of the match log; the latent sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: SynthParams,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Replay(args) => cmd_replay(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Synth(args) => cmd_synth(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn build_system(kind: SystemKind, args: &ReplayArgs) -> Result<Box<dyn RatingSystem>> {
    Ok(match kind {
        SystemKind::Elo => {
            let mut cfg = EloConfig::default();
            if let Some(k) = args.k {
                cfg.k = k;
            }
            if let Some(d) = args.d {
                cfg.d = d;
            }
            Box::new(EloSystem::new(cfg)?)
        }
        SystemKind::Glicko => Box::new(GlickoSystem::default()),
        SystemKind::TrueSkill => {
            let mut cfg = TrueSkillConfig::default();
            if let Some(beta) = args.beta {
                cfg.beta = beta;
            }
            if let Some(tau) = args.tau_dynamics {
                cfg.tau = tau;
            }
            Box::new(TrueSkillSystem::new(cfg)?)
        }
        SystemKind::PreviousRank => Box::new(PreviousRankSystem),
    })
}

fn selected_systems(arg: SystemArg) -> Vec<SystemKind> {
    match arg {
        SystemArg::Elo => vec![SystemKind::Elo],
        SystemArg::Glicko => vec![SystemKind::Glicko],
        SystemArg::Trueskill => vec![SystemKind::TrueSkill],
        SystemArg::PreviousRank => vec![SystemKind::PreviousRank],
        SystemArg::All => SystemKind::ALL.to_vec(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

struct SystemOutput {
    kind: SystemKind,
    result: ReplayResult,
    bins: Option<BinTable>,
    curves: Option<CohortCurves>,
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let matches = if args.synth {
        generate_synthetic(&args.synth_params.config(args.seed))?.matches
    } else {
        let path = args.input.as_ref().expect("clap enforces input xor synth");
        let opts = ParseOptions {
            delimiter: args.delimiter,
            seed: args.seed,
        };
        let (records, report) = parse_match_log_path(path, &opts)
            .with_context(|| format!("reading {}", path.display()))?;
        eprintln!(
            "parsed {} matches / {} players ({} rows skipped, {} matches repaired)",
            report.matches,
            report.players,
            report.rows_skipped_non_solo + report.rows_unparseable,
            report.matches_repaired
        );
        records
    };

    let spec = cohort_spec(&args);
    let replay_cfg = ReplayConfig {
        seed: args.seed,
        collect_histories: matches!(args.setup, SetupArg::Best | SetupArg::Frequent),
        history_horizon: spec.horizon,
        ..ReplayConfig::default()
    };

    // Independent state per system: run them concurrently.
    let kinds = selected_systems(args.system);
    let mut outputs: Vec<Option<Result<SystemOutput>>> = Vec::new();
    outputs.resize_with(kinds.len(), || None);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (slot, &kind) in kinds.iter().enumerate() {
            let matches = &matches;
            let args = &args;
            let replay_cfg = &replay_cfg;
            let spec = &spec;
            handles.push((
                slot,
                scope.spawn(move || run_system(kind, matches, args, replay_cfg, spec)),
            ));
        }
        for (slot, handle) in handles {
            outputs[slot] = Some(handle.join().expect("replay thread panicked"));
        }
    });

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut summary: Vec<(SystemKind, [f64; 6])> = Vec::new();
    for output in outputs.into_iter().flatten() {
        let output = output?;
        write_outputs(&args, &output)?;
        summary.push((output.kind, output.result.series.means()));
    }
    print_summary(&summary);
    Ok(())
}

fn cohort_spec(args: &ReplayArgs) -> CohortSpec {
    let mut spec = match args.setup {
        SetupArg::Frequent => CohortSpec::frequent(),
        SetupArg::Best => CohortSpec::best(),
        SetupArg::AllPlayers => CohortSpec {
            kind: CohortKind::All,
            ..CohortSpec::best()
        },
        SetupArg::Binned => CohortSpec {
            kind: CohortKind::Binned,
            ..CohortSpec::best()
        },
    };
    spec.seed = args.seed;
    spec.bins = args.bins;
    if let Some(size) = args.cohort_size {
        spec.cohort_size = size;
    }
    if let Some(min_games) = args.min_games {
        spec.min_games = min_games;
    }
    if let Some(horizon) = args.horizon {
        spec.horizon = horizon;
    }
    spec
}

fn run_system(
    kind: SystemKind,
    matches: &[ffa_rank::MatchRecord],
    args: &ReplayArgs,
    replay_cfg: &ReplayConfig,
    spec: &CohortSpec,
) -> Result<SystemOutput> {
    let system = build_system(kind, args)?;
    let (result, bins) = if args.setup == SetupArg::Binned {
        let mut acc = BinAccumulator::new(args.bins);
        let result = replay_with(matches, system.as_ref(), replay_cfg, |outcome| {
            acc.add(outcome);
        })?;
        (result, Some(acc.finish()))
    } else {
        (replay(matches, system.as_ref(), replay_cfg)?, None)
    };
    let curves = match args.setup {
        SetupArg::Best => Some(cohort_best(
            &result.store,
            &result.histories,
            system.as_ref(),
            spec,
        )),
        SetupArg::Frequent => Some(cohort_frequent(&result.histories, spec)),
        _ => None,
    };
    Ok(SystemOutput {
        kind,
        result,
        bins,
        curves,
    })
}

fn write_outputs(args: &ReplayArgs, output: &SystemOutput) -> Result<()> {
    let name = output.kind.as_str();
    let series_path = args.out.join(format!("series_{name}.csv"));
    report::write_series(create(&series_path)?, &output.result.series, args.window)?;

    if let Some(curves) = &output.curves {
        let label = match args.setup {
            SetupArg::Best => "best",
            SetupArg::Frequent => "frequent",
            _ => unreachable!("curves only exist for cohort set-ups"),
        };
        let path = args.out.join(format!("cohort_{label}_{name}.csv"));
        report::write_curves(create(&path)?, curves)?;
    }

    if let Some(bins) = &output.bins {
        let path = args.out.join(format!("bins_{name}.csv"));
        if bins.matches_used == 0 {
            eprintln!(
                "warning: no match had at least {} players; bin table for {name} is empty",
                args.bins
            );
            let empty = BinTable {
                rows: Vec::new(),
                matches_used: 0,
                skipped_small: bins.skipped_small,
            };
            report::write_bin_table(create(&path)?, &empty)?;
        } else {
            report::write_bin_table(create(&path)?, bins)?;
        }
    }

    if args.emit_store {
        let path = args.out.join(format!("store_{name}.csv"));
        report::write_store_snapshot(create(&path)?, &output.result.store)?;
    }
    Ok(())
}

fn print_summary(summary: &[(SystemKind, [f64; 6])]) {
    println!(
        "{:<14} {:>10} {:>10} {:>12} {:>10} {:>10} {:>10}",
        "system", "accuracy", "mae", "kendall_tau", "mrr", "ap", "ndcg"
    );
    for (kind, means) in summary {
        println!(
            "{:<14} {:>10.4} {:>10.4} {:>12.4} {:>10.4} {:>10.4} {:>10.4}",
            kind.as_str(),
            means[0],
            means[1],
            means[2],
            means[3],
            means[4],
            means[5]
        );
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let opts = ParseOptions {
        delimiter: args.delimiter,
        seed: args.seed,
    };
    let (_, report) = parse_match_log_path(&args.input, &opts)
        .with_context(|| format!("reading {}", args.input.display()))?;
    println!("matches:             {}", report.matches);
    println!("players:             {}", report.players);
    println!("rows read:           {}", report.rows_read);
    println!("rows non-solo:       {}", report.rows_skipped_non_solo);
    println!("rows unparseable:    {}", report.rows_unparseable);
    println!("matches rejected:    {}", report.matches_rejected);
    println!("matches dropped:     {}", report.matches_dropped_short);
    println!("matches repaired:    {}", report.matches_repaired);
    println!("ties broken:         {}", report.ties_broken);
    for diagnostic in &report.diagnostics {
        eprintln!("note: {diagnostic}");
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = args.params.config(args.seed);
    let data = generate_synthetic(&cfg)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_match_log(create(&args.out)?, &data.matches, b',')?;
    let sidecar = sidecar_path(&args.out);
    write_latent_sidecar(create(&sidecar)?, &data.latent_skills)?;
    eprintln!(
        "wrote {} matches to {} (latent skills in {})",
        data.matches.len(),
        args.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn sidecar_path(log_path: &Path) -> PathBuf {
    let mut name = log_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synthetic".into());
    name.push_str(".latent.csv");
    log_path.with_file_name(name)
}
