use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sharing-game"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    write_config(
        dir,
        r#"{"user_draws": 2, "fading_draws": 1, "seed": 5, "scenario": {"preset": "two-player"}}"#,
    )
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("error record on stderr");
    serde_json::from_str(line).expect("error record is JSON")
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin().arg("run").arg(&config).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["summary"]["n_players"], 2);
    assert_eq!(v["summary"]["realizations"], 2);
    let rates = fs::read_to_string(out_dir.join("rates.csv")).unwrap();
    assert!(rates.starts_with(
        "realization,user_draw,fading_draw,player,user,game_rate_bps,default_rate_bps,cs_sr_rate_bps,cs_lr_rate_bps\n"
    ));
    let conv = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(conv.starts_with("realization,mode,iterations,converged\n"));
    assert_eq!(conv.lines().count(), 3);
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn run_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let go = |name: &str, seed: &str| {
        let d = dir.path().join(name);
        let out = bin()
            .args(["run", config.to_str().unwrap(), "--seed", seed, "--out"])
            .arg(&d)
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read(d.join("rates.csv")).unwrap()
    };
    let a = go("a", "9");
    assert_eq!(a, go("b", "9"));
    assert_ne!(a, go("c", "10"));
}

#[test]
fn flags_override_players_and_mode() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"user_draws": 1, "fading_draws": 1, "verify_nash": false}"#);
    let out_dir = dir.path().join("out");
    let out = bin()
        .arg("run")
        .arg(&config)
        .args(["--players", "4", "--mode", "mdsg-then-sdsg", "--visiting-prob", "0.5", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["summary"]["n_players"], 4);
    let conv = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(conv.contains(",mdsg,") && conv.contains(",sdsg,"));
}

#[test]
fn invalid_config_is_reported_before_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    let config = write_config(dir.path(), r#"{"scenario": {"visiting_prob": 1.5}}"#);
    let out = bin().arg("run").arg(&config).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"], "config");
    assert!(!out_dir.exists());

    let config = write_config(dir.path(), r#"{"unknown_field": true}"#);
    let out = bin().arg("run").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"], "config");

    let out = bin().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"], "io");

    let config = small_config(dir.path());
    let out = bin().arg("run").arg(&config).args(["--players", "3"]).output().unwrap();
    assert_eq!(stderr_record(&out)["error"], "config");
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = bin().arg("run").arg(&config).arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let record = stderr_record(&out);
    assert_eq!(record["error"], "io");
    assert!(record["message"].as_str().unwrap().contains("sub"));
}

#[test]
fn bad_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = bin().arg("run").arg(&config).args(["--mode", "random"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn verify_passes_on_small_pool() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = bin().arg("verify").arg(&config).args(["--scenarios", "2"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 7);
}

#[test]
fn oracle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = bin().arg("oracle").arg(&config).args(["--profiles", "20"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 3);
}
