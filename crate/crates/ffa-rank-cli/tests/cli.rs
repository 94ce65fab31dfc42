//! End-to-end tests of the `ffa-rank` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ffa-rank"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

const SMALL_SYNTH: &[&str] = &[
    "--synth",
    "--players",
    "60",
    "--matches",
    "150",
    "--per-match",
    "8",
];

#[test]
fn synth_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = run(&[
            "synth",
            "--out",
            path.to_str().unwrap(),
            "--seed",
            seed,
            "--players",
            "40",
            "--matches",
            "30",
            "--per-match",
            "5",
        ]);
        assert!(out.status.success(), "synth failed: {}", stderr(&out));
    }
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    // Sidecar exists and is deterministic too.
    assert_eq!(
        read(&dir.path().join("a.latent.csv")),
        read(&dir.path().join("b.latent.csv"))
    );
}

#[test]
fn replay_all_systems_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out_dir in [&out1, &out2] {
        let mut args = vec!["replay"];
        args.extend_from_slice(SMALL_SYNTH);
        args.extend_from_slice(&[
            "--system",
            "all",
            "--setup",
            "all_players",
            "--seed",
            "7",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        let out = run(&args);
        assert!(out.status.success(), "replay failed: {}", stderr(&out));
        let text = stdout(&out);
        for name in ["elo", "glicko", "trueskill", "previous_rank"] {
            assert!(text.contains(name), "summary missing {name}:\n{text}");
        }
    }
    for name in ["elo", "glicko", "trueskill", "previous_rank"] {
        let file = format!("series_{name}.csv");
        assert_eq!(
            read(&out1.join(&file)),
            read(&out2.join(&file)),
            "{file} differs between identical runs"
        );
    }
}

#[test]
fn validate_reports_repairs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    std::fs::write(
        &log,
        "match_id,date,player_id,placement,party_size\n\
         m1,100,a,1,1\n\
         m1,100,b,2,1\n\
         m1,100,c,2,1\n\
         m1,100,d,4,1\n\
         m2,90,x,1,1\n\
         m2,90,y,2,1\n",
    )
    .unwrap();
    let out = run(&["validate", "--input", log.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("matches:             2"), "{text}");
    assert!(text.contains("matches repaired:    1"), "{text}");
    assert!(text.contains("ties broken:         1"), "{text}");
}

#[test]
fn validate_clean_file_has_zero_repairs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    std::fs::write(
        &log,
        "match_id,date,player_id,placement,party_size\n\
         m1,100,a,1,1\n\
         m1,100,b,2,1\n",
    )
    .unwrap();
    let out = run(&["validate", "--input", log.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("matches repaired:    0"));
}

#[test]
fn missing_input_fails_without_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let out = run(&[
        "replay",
        "--input",
        dir.path().join("nope.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!out_dir.exists(), "no partial outputs on failure");
}

#[test]
fn malformed_header_fails() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.csv");
    std::fs::write(&log, "id,when,who\n1,2,3\n").unwrap();
    let out = run(&["validate", "--input", log.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("missing required columns"));
}

#[test]
fn binned_setup_with_small_fields_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("small.csv");
    std::fs::write(
        &log,
        "match_id,date,player_id,placement,party_size\n\
         m1,100,a,1,1\n\
         m1,100,b,2,1\n\
         m1,100,c,3,1\n",
    )
    .unwrap();
    let out_dir = dir.path().join("results");
    let out = run(&[
        "replay",
        "--input",
        log.to_str().unwrap(),
        "--system",
        "elo",
        "--setup",
        "binned",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("bin table for elo is empty"));
    let bins = String::from_utf8(read(&out_dir.join("bins_elo.csv"))).unwrap();
    assert_eq!(bins.trim(), "bin,metric,mean,n");
}

#[test]
fn best_setup_emits_cohort_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let mut args = vec!["replay"];
    args.extend_from_slice(SMALL_SYNTH);
    args.extend_from_slice(&[
        "--system",
        "trueskill",
        "--setup",
        "best",
        "--seed",
        "3",
        "--cohort-size",
        "10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let curves = String::from_utf8(read(&out_dir.join("cohort_best_trueskill.csv"))).unwrap();
    let mut lines = curves.lines();
    assert_eq!(lines.next().unwrap(), "game_index,metric,mean,stderr,n");
    // Default horizon 10, six metrics per game index.
    assert_eq!(curves.lines().count(), 1 + 60);
}

#[test]
fn binned_setup_emits_bin_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let mut args = vec!["replay"];
    args.extend_from_slice(SMALL_SYNTH);
    args.extend_from_slice(&[
        "--system",
        "glicko",
        "--setup",
        "binned",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let bins = String::from_utf8(read(&out_dir.join("bins_glicko.csv"))).unwrap();
    assert_eq!(bins.lines().count(), 1 + 30, "5 bins x 6 metrics:\n{bins}");
}

#[test]
fn smoothing_window_changes_the_series_file() {
    let dir = tempfile::tempdir().unwrap();
    let raw_dir = dir.path().join("raw");
    let smooth_dir = dir.path().join("smooth");
    for (out_dir, window) in [(&raw_dir, None), (&smooth_dir, Some("5"))] {
        let mut args = vec!["replay"];
        args.extend_from_slice(SMALL_SYNTH);
        args.extend_from_slice(&[
            "--system",
            "elo",
            "--seed",
            "2",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        if let Some(w) = window {
            args.extend_from_slice(&["--window", w]);
        }
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let raw = read(&raw_dir.join("series_elo.csv"));
    let smooth = read(&smooth_dir.join("series_elo.csv"));
    assert_ne!(raw, smooth);
    assert_eq!(
        String::from_utf8_lossy(&raw).lines().count(),
        String::from_utf8_lossy(&smooth).lines().count()
    );
}

#[test]
fn emit_store_writes_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let mut args = vec!["replay"];
    args.extend_from_slice(SMALL_SYNTH);
    args.extend_from_slice(&[
        "--system",
        "previous_rank",
        "--emit-store",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let store = String::from_utf8(read(&out_dir.join("store_previous_rank.csv"))).unwrap();
    assert!(store.starts_with("player_id,mu,sigma,games_played"));
    assert!(store.lines().count() > 1);
}

#[test]
fn hyperparameter_overrides_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let default_dir = dir.path().join("default");
    let tuned_dir = dir.path().join("tuned");
    for (out_dir, extra) in [(&default_dir, None), (&tuned_dir, Some(["--k", "40"]))] {
        let mut args = vec!["replay"];
        args.extend_from_slice(SMALL_SYNTH);
        args.extend_from_slice(&[
            "--system",
            "elo",
            "--seed",
            "2",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        if let Some(extra) = extra {
            args.extend_from_slice(&extra);
        }
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_ne!(
        read(&default_dir.join("series_elo.csv")),
        read(&tuned_dir.join("series_elo.csv"))
    );
}

#[test]
fn infeasible_synth_spec_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "replay",
        "--synth",
        "--players",
        "5",
        "--per-match",
        "10",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("infeasible"));
}
