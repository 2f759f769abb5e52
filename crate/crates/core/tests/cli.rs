use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use async_heat::field::linear_steady_state;
use async_heat::io::svg::polyline_points;

fn heat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HEAT_SEED")
        .output()
        .unwrap()
}

#[test]
fn steady_prints_linear_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(&["steady", "--set", "N=5"], tmp.path());
    assert!(out.status.success());
    let printed: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(printed, linear_steady_state(5, 1.0, 0.0).unwrap().values());
}

#[test]
fn steady_periodic_is_mean_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(&["steady", "--set", "bc=periodic"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 100);
    assert!(values.iter().all(|&v| v == 0.5));
}

#[test]
fn run_writes_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(&["run", "--set", "k_end=20"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("k,i,u"));
    assert_eq!(csv.lines().count(), 1 + 21 * 100);
}

#[test]
fn executor_modes_run() {
    for mode in ["exec-barriered", "exec-free"] {
        let tmp = tempfile::tempdir().unwrap();
        let out = heat(&["run", "--set", &format!("mode={mode}"), "--set", "n=50", "--set", "workers=2", "--set", "k_end=50"], tmp.path());
        assert!(out.status.success(), "{mode}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(tmp.path().join("trajectory.csv").exists());
    }
}

#[test]
fn unknown_key_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(&["run", "--set", "bogus=1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn unstable_r_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(&["run", "--set", "r=0.6"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_syntax_error_names_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{\"N\": 10,").unwrap();
    let out = heat(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
}

#[test]
fn missing_config_file_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(&["run", "--config", "/nonexistent/heat.json"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = heat(&["run", "--set", "k_end=1"], &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergence_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(
        &["run", "--set", "r=0.6", "--set", "allow_unstable=true", "--set", "k_end=5000"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn env_seed_is_overridden_by_set() {
    let run = |env: Option<&str>, set: Option<&str>| {
        let tmp = tempfile::tempdir().unwrap();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_heat"));
        cmd.args(["run", "--set", "mode=async-sim", "--set", "k_end=200"]);
        cmd.env_remove("HEAT_SEED");
        if let Some(seed) = env {
            cmd.env("HEAT_SEED", seed);
        }
        if let Some(seed) = set {
            cmd.args(["--set", &format!("seed={seed}")]);
        }
        assert!(cmd.arg("--out").arg(tmp.path()).stdout(Stdio::null()).status().unwrap().success());
        fs::read(tmp.path().join("trajectory.csv")).unwrap()
    };
    assert_eq!(run(Some("9"), None), run(None, Some("9")));
    assert_eq!(run(Some("3"), Some("9")), run(None, Some("9")));
    assert_ne!(run(Some("3"), None), run(None, Some("9")));
}

#[test]
fn dirichlet_ensemble_svg_lines_converge() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heat(
        &["ensemble", "--set", "runs=50", "--set", "k_end=200000", "--set", "stride=2000"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(tmp.path().join("ensemble.svg")).unwrap();
    let lines = polyline_points(&svg);
    assert_eq!(lines.len(), 51);
    let ends: Vec<f64> = lines.iter().map(|l| l.last().unwrap().1).collect();
    let (lo, hi) = ends.iter().fold((f64::MAX, f64::MIN), |(a, b), &y| (a.min(y), b.max(y)));
    assert!((hi - lo) <= 1e-3 * hi.abs().max(lo.abs()), "terminal y spread {lo}..{hi}");
}
