use std::path::Path;
use std::process::{Command, Output};

use dualgap::bench::Verdict;
use dualgap::generators::{generate, GameSpec};
use dualgap::io::{read_json, write_matrix, write_profile};
use dualgap::lp::full_game_lp;
use dualgap::trace::{Outcome, SolveTrace};

fn dualgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualgap")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn verdict(out: &Output) -> Verdict {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("game.csv");
    let run = dir.path().join("run");
    let out = dualgap(&["generate", "--rows", "40", "--cols", "30", "--seed", "3", "--out", path(&game)]);
    assert!(out.status.success());

    let out = dualgap(&["solve", "--matrix", path(&game), "--out", path(&run), "--delta", "0.01", "--rho", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["trace.csv", "trace.json", "profile.json"] {
        assert!(run.join(file).exists(), "missing {file}");
    }
    let trace: SolveTrace = read_json(&run.join("trace.json")).unwrap();
    assert_eq!(trace.outcome, Outcome::Converged);

    let out = dualgap(&["verify", "--matrix", path(&game), "--profile", path(&run.join("profile.json")), "--delta", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let v = verdict(&out);
    assert!(v.is_delta_ne);
    assert!((v.duality_gap - trace.final_gap).abs() < 1e-12);
}

#[test]
fn verify_accepts_the_exact_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let r = generate(&GameSpec::uniform(20, 11)).unwrap();
    let z = full_game_lp(&r, 1e-10).unwrap();
    let (game, profile) = (dir.path().join("game.json"), dir.path().join("ne.json"));
    write_matrix(&game, &r).unwrap();
    write_profile(&profile, &z).unwrap();
    let out = dualgap(&["verify", "--matrix", path(&game), "--profile", path(&profile), "--delta", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(verdict(&out).is_delta_ne);
}

#[test]
fn verify_reports_a_bad_profile_as_false() {
    let dir = tempfile::tempdir().unwrap();
    let r = generate(&GameSpec::uniform(20, 11)).unwrap();
    let (game, profile) = (dir.path().join("game.csv"), dir.path().join("pure.json"));
    write_matrix(&game, &r).unwrap();
    write_profile(&profile, &dualgap::StrategyProfile::pure(20, 20, 0, 0)).unwrap();
    let out = dualgap(&["verify", "--matrix", path(&game), "--profile", path(&profile), "--delta", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!verdict(&out).is_delta_ne);
}

#[test]
fn infeasible_low_rank_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("game.csv");
    let out = dualgap(&[
        "generate", "--family", "low-rank", "--rank", "9", "--rows", "8", "--cols", "6", "--out", path(&game),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert!(!game.exists());
}

#[test]
fn exit_codes() {
    assert_eq!(dualgap(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(dualgap(&["--help"]).status.code(), Some(0));
    let out = dualgap(&["verify", "--matrix", "/nonexistent/g.csv", "--profile", "/nonexistent/z.json", "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "specs": [
            {"family": "Uniform", "rows": 12, "cols": 12, "seed": 1},
            {"family": "Uniform", "rows": 16, "cols": 10, "seed": 2}
        ],
        "solvers": [
            {"kind": "Descent", "config": {"delta": 0.05, "rho": 0.2, "epsilon_policy": "FixedHalfRho", "variant": "Plain"}},
            {"kind": "Ogda", "config": {"delta": 0.05, "alpha": 0.05, "max_iterations": 5000, "initialization": "PureFirst", "schedule": "Constant"}}
        ],
        "out_dir": path(&dir.path().join("unused"))
    });
    let config_path = dir.path().join("bench.json");
    std::fs::write(&config_path, config.to_string()).unwrap();
    let out_dir = dir.path().join("bench");
    let out = dualgap(&["bench", "--config", path(&config_path), "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    let traces = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("trace-"))
        .count();
    assert_eq!(traces, 4);
}
