use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use uavnet_cli::files::{read_json, write_json};
use uavnet_cli::{ScenarioFile, SolutionFile};

fn uavnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavnet")).args(args).output().expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut args = vec!["generate", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = uavnet(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_is_deterministic_and_uses_defaults() {
    let dir = TempDir::new().unwrap();
    let args = ["--users", "6", "--uavs", "3", "--seed", "42"];
    let a = generate(&dir, "a.json", &args);
    let b = generate(&dir, "b.json", &args);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let file: ScenarioFile = read_json(&a).unwrap();
    assert_eq!(file.area_m, [2000.0, 2000.0]);
    assert_eq!((file.vmax_mps, file.pmax_w, file.dmin_m), (50.0, 0.1, 50.0));
    assert_eq!((file.sigma2_w, file.rho0, file.altitude_m), (1e-14, 1e-6, 100.0));
    assert_eq!((file.period_s, file.slots), (210.0, 210));

    let c = generate(&dir, "c.json", &["--users", "6", "--uavs", "3", "--seed", "43"]);
    let other: ScenarioFile = read_json(&c).unwrap();
    assert_ne!(file.users, other.users);
}

#[test]
fn scenario_round_trips_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["--users", "5", "--uavs", "2", "--period", "30"]);
    let file: ScenarioFile = read_json(&a).unwrap();
    let again = ScenarioFile::from_scenario(&file.to_scenario().unwrap());
    let b = path(&dir, "b.json");
    write_json(&b, &again).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["--users", "3", "--uavs", "1", "--period", "20"]);
    let text = fs::read_to_string(&a).unwrap().replacen('{', "{\n  \"color\": 1,", 1);
    fs::write(&a, text).unwrap();
    let o = uavnet(&["solve", s(&a), "--out", s(&path(&dir, "x.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_2() {
    let o = uavnet(&["generate", "--users", "3", "--uavs", "1", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_prints_objective_and_matches_eval() {
    let dir = TempDir::new().unwrap();
    let sc = generate(&dir, "s.json", &["--users", "5", "--uavs", "2", "--period", "40", "--seed", "9"]);
    let out = path(&dir, "sol.json");
    let o = uavnet(&["solve", s(&sc), "--out", s(&out)]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("objective_bps_hz=")).unwrap();
    let printed: f64 = line["objective_bps_hz=".len()..].parse().unwrap();
    let sol: SolutionFile = read_json(&out).unwrap();
    assert_eq!(printed, sol.objective_bps_hz);

    let e = uavnet(&["eval", s(&sc), s(&out)]);
    assert_eq!(e.status.code(), Some(0));
    let text = String::from_utf8(e.stdout).unwrap();
    assert!(text.contains("verdict=feasible"));
    let mean: f64 = text.lines().next().unwrap()["mean_bps_hz=".len()..].parse().unwrap();
    assert!((mean - printed).abs() <= 1e-9 * printed.abs());
}

#[test]
fn single_outer_iteration_with_loose_tolerance() {
    let dir = TempDir::new().unwrap();
    let sc = generate(&dir, "s.json", &["--users", "4", "--uavs", "2", "--period", "30"]);
    let out = path(&dir, "sol.json");
    let o = uavnet(&["solve", s(&sc), "--out", s(&out), "--max-outer", "1", "--tol", "10"]);
    assert!(o.status.success());
    let sol: SolutionFile = read_json(&out).unwrap();
    assert_eq!(sol.trace.len(), 1);
}

#[test]
fn power_control_never_hurts() {
    let dir = TempDir::new().unwrap();
    let sc = generate(&dir, "s.json", &["--users", "6", "--uavs", "2", "--period", "60", "--seed", "5"]);
    let (on, off) = (path(&dir, "on.json"), path(&dir, "off.json"));
    assert!(uavnet(&["solve", s(&sc), "--out", s(&on)]).status.success());
    assert!(uavnet(&["solve", s(&sc), "--out", s(&off), "--no-power-opt"]).status.success());
    let on: SolutionFile = read_json(&on).unwrap();
    let off: SolutionFile = read_json(&off).unwrap();
    assert!(on.objective_bps_hz >= off.objective_bps_hz);
}

#[test]
fn baselines_follow_their_construction() {
    let dir = TempDir::new().unwrap();
    let sc = generate(&dir, "s.json", &["--users", "6", "--uavs", "1", "--seed", "2"]);
    let st = path(&dir, "static.json");
    assert!(uavnet(&["baseline", s(&sc), "--kind", "static", "--out", s(&st)]).status.success());
    let sol: SolutionFile = read_json(&st).unwrap();
    assert!(sol.trajectories[0].iter().all(|p| *p == sol.trajectories[0][0]));

    let ci = path(&dir, "circ.json");
    assert!(uavnet(&["baseline", s(&sc), "--kind", "circular", "--out", s(&ci)]).status.success());
    let sol: SolutionFile = read_json(&ci).unwrap();
    let xs: Vec<f64> = sol.trajectories[0].iter().map(|p| p[0]).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(((hi - lo) / 2.0 - 1000.0).abs() < 1e-6);

    let four = generate(&dir, "four.json", &["--users", "6", "--uavs", "4"]);
    let o = uavnet(&["baseline", s(&four), "--kind", "circular", "--out", s(&path(&dir, "x.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_flags_corrupted_solutions() {
    let dir = TempDir::new().unwrap();
    let sc = generate(&dir, "s.json", &["--users", "4", "--uavs", "2", "--period", "30", "--seed", "1"]);
    let out = path(&dir, "sol.json");
    assert!(uavnet(&["solve", s(&sc), "--out", s(&out)]).status.success());
    let good: SolutionFile = read_json(&out).unwrap();

    let mut fast = good.clone();
    fast.trajectories[0][3][0] += 500.0;
    let bad = path(&dir, "fast.json");
    write_json(&bad, &fast).unwrap();
    let o = uavnet(&["eval", s(&sc), s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stdout).unwrap().contains("speed"));

    let mut twice = good.clone();
    twice.schedule[0][0] = 2;
    twice.schedule[1][0] = 2;
    let bad = path(&dir, "twice.json");
    write_json(&bad, &twice).unwrap();
    let o = uavnet(&["eval", s(&sc), s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stdout).unwrap().contains("user-served-twice"));
}

#[test]
fn plot_writes_svg_and_csv() {
    let dir = TempDir::new().unwrap();
    let sc = generate(&dir, "s.json", &["--users", "5", "--uavs", "2", "--period", "30"]);
    let out = path(&dir, "sol.json");
    assert!(uavnet(&["solve", s(&sc), "--out", s(&out)]).status.success());
    let svg = path(&dir, "view.svg");
    let o = uavnet(&["plot", s(&sc), s(&out), "--out", s(&svg)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("polygon") && text.contains("objective"));
    let csv = fs::read_to_string(svg.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "m,n,x_m,y_m,p_m,served_user");
    assert_eq!(lines.count(), 2 * 30);

    let o = uavnet(&["plot", s(&sc), s(&out), "--out", "/nonexistent-dir/v.svg"]);
    assert_eq!(o.status.code(), Some(2));
}
