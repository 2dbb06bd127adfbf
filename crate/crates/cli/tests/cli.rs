use std::path::Path;

use assert_cmd::Command;
use predicates::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn trifree() -> Command {
    let mut c = Command::cargo_bin("trifree").unwrap();
    c.env_remove("TFC_SEED");
    c
}

fn records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn without_wall_clock(mut v: Vec<Value>) -> Vec<Value> {
    for r in &mut v {
        r.as_object_mut()
            .unwrap()
            .retain(|k, _| !k.starts_with("wall_"));
    }
    v
}

#[test]
fn run_writes_windows_and_totals_deterministically() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for out in [&a, &b] {
        trifree()
            .args([
                "run", "--n", "300", "--delta", "16", "--k", "1", "--T", "3000",
            ])
            .args(["--adversary", "oblivious", "--seed", "7", "--metrics"])
            .arg(out)
            .assert()
            .success();
    }
    let ra = records(&a);
    assert_eq!(ra.len(), 3000usize.div_ceil(1024) + 1);
    let totals = ra.last().unwrap();
    assert_eq!(totals["record"], "totals");
    assert_eq!(totals["config"]["seed"], 7);
    let window_sum: u64 = ra[..ra.len() - 1]
        .iter()
        .map(|w| w["updates"].as_u64().unwrap())
        .sum();
    assert_eq!(window_sum, totals["updates"].as_u64().unwrap());
    assert_eq!(without_wall_clock(ra), without_wall_clock(records(&b)));
}

#[test]
fn monochrome_run_succeeds() {
    trifree()
        .args([
            "run",
            "--n",
            "80",
            "--delta",
            "8",
            "--T",
            "2000",
            "--adversary",
            "monochrome",
        ])
        .args(["--seed", "3", "--full-check"])
        .assert()
        .success();
}

#[test]
fn exhausted_budget_exits_nonzero() {
    let out = trifree()
        .args(["run", "--n", "8", "--delta", "3", "--T", "200", "--q", "3"])
        .args([
            "--thr-a", "1", "--thr-f", "2", "--budget", "0", "--seed", "1",
        ])
        .assert()
        .code(1);
    let stdout = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    assert!(stdout.contains("\"budget_status\":\"exhausted\""));
}

#[test]
fn seed_env_overrides_config_but_not_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    let base = serde_json::json!({
        "n": 50, "delta": 8, "steps": 100, "k": 1, "engine": "local", "eps": 1.0,
        "q": null, "thr_a": null, "thr_f": null, "seed": 5,
        "adversary": {"kind": "oblivious", "insert_frac": 0.7},
        "budget": null, "log_mode": null, "checkpoint_every": 1024, "full_check": false
    });
    std::fs::write(&cfg, base.to_string()).unwrap();
    let seed_of = |cmd: &mut Command| {
        let out = cmd.assert().success();
        let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
        let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        last["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(trifree().args(["run", "--config"]).arg(&cfg)), 5);
    assert_eq!(
        seed_of(
            trifree()
                .env("TFC_SEED", "0x10")
                .args(["run", "--config"])
                .arg(&cfg)
        ),
        16
    );
    assert_eq!(
        seed_of(
            trifree()
                .env("TFC_SEED", "0x10")
                .args(["run", "--seed", "9", "--config"])
                .arg(&cfg)
        ),
        9
    );
}

#[test]
fn gen_trace_validates_and_drives_a_run() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("t.txt");
    trifree()
        .args([
            "gen-trace",
            "--n",
            "100",
            "--delta",
            "8",
            "--T",
            "1500",
            "--seed",
            "2",
            "--out",
        ])
        .arg(&trace)
        .assert()
        .success();
    trifree()
        .arg("validate-trace")
        .arg(&trace)
        .assert()
        .success()
        .stdout(predicates::str::starts_with("clean"));
    trifree()
        .args([
            "run",
            "--n",
            "100",
            "--delta",
            "8",
            "--T",
            "1500",
            "--adversary",
            "trace",
            "--trace",
        ])
        .arg(&trace)
        .assert()
        .success();
    trifree()
        .arg("validate-trace")
        .arg(&trace)
        .args(["--delta", "1"])
        .assert()
        .code(1);
}

#[test]
fn recover_toy_log() {
    let dir = TempDir::new().unwrap();
    let (log, trace) = (dir.path().join("run.tfclog"), dir.path().join("t.txt"));
    trifree()
        .args([
            "run", "--n", "8", "--delta", "3", "--T", "50", "--q", "3", "--thr-a", "1",
        ])
        .args(["--thr-f", "2", "--seed", "11", "--log-mode", "toy", "--log"])
        .arg(&log)
        .arg("--trace-out")
        .arg(&trace)
        .assert()
        .success();
    trifree()
        .args(["recover", "--replay", "--log"])
        .arg(&log)
        .arg("--trace")
        .arg(&trace)
        .assert()
        .success()
        .stdout(
            predicates::str::contains("recovered")
                .and(predicates::str::contains("replay reproduced")),
        );
}

#[test]
fn verify_accepts_snapshot_and_rejects_corruption() {
    let dir = TempDir::new().unwrap();
    let snap = dir.path().join("snap.json");
    trifree()
        .args([
            "run",
            "--n",
            "60",
            "--delta",
            "8",
            "--T",
            "800",
            "--snapshot",
        ])
        .arg(&snap)
        .assert()
        .success();
    trifree().arg("verify").arg(&snap).assert().success();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&snap).unwrap()).unwrap();
    let (a, b) = (
        v["edges"][0][0].as_u64().unwrap(),
        v["edges"][0][1].as_u64().unwrap(),
    );
    let cb = v["colors"][b as usize].clone();
    v["colors"][a as usize] = cb;
    std::fs::write(&snap, v.to_string()).unwrap();
    trifree().arg("verify").arg(&snap).assert().code(1);
}

#[test]
fn bench_prints_one_row_per_config() {
    let out = trifree()
        .args([
            "bench", "--n", "200", "--delta", "16,32", "--T", "500", "--k", "1", "--jobs", "2",
        ])
        .assert()
        .success();
    let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    // Header plus (A_1, greedy) per degree.
    assert_eq!(text.lines().count(), 1 + 4);
    assert_eq!(text.lines().filter(|l| l.starts_with("greedy")).count(), 2);
}

#[test]
fn bad_config_is_a_usage_error() {
    trifree().args(["run", "--n", "10"]).assert().code(2);
    trifree()
        .args([
            "run",
            "--n",
            "10",
            "--delta",
            "3",
            "--T",
            "5",
            "--k",
            "2",
            "--log-mode",
            "toy",
        ])
        .assert()
        .code(2);
}
