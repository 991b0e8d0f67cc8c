// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_robust-ci"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn pair(out: &Output) -> (f64, f64) {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().unwrap();
    let mut it = line.split_whitespace().map(|x| x.parse::<f64>().unwrap());
    (it.next().unwrap(), it.next().unwrap())
}

#[test]
fn binomial_interval_prints_two_numbers() {
    let data = "3 4 5 6 4 5 3 5 ".repeat(50);
    let out = run(&["ci-binom", "--m", "10", "--eps-max", "0.05"], &data);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (lo, hi) = pair(&out);
    assert!(lo < 0.4375 && 0.4375 < hi && hi <= 1.0);
}

#[test]
fn small_samples_warn_on_stderr() {
    let out = run(&["ci-binom", "--m", "1", "--eps-max", "0.2"], "0 1 1 0 1");
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn poisson_interval_contains_sample_mean() {
    let out = run(&["ci-poisson", "--eps-max", "0.02"], &"1 2 2 3 ".repeat(100));
    assert!(out.status.success());
    let (lo, hi) = pair(&out);
    assert!(lo <= 2.0 && 2.0 <= hi);
}

#[test]
fn bad_input_exits_with_error() {
    let out = run(&["ci-binom", "--m", "3", "--eps-max", "0.1"], "1 2 7");
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["ci-binom", "--m", "3", "--eps-max", "0.1"], "1 x");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_with_known_contamination() {
    let out = run(&["estimate", "--m", "4", "--eps", "0.01"], &"2 ".repeat(300));
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let p: f64 = text.lines().next().unwrap().parse().unwrap();
    assert!((p - 0.5).abs() < 1e-9);
    let (lo, hi) = pair(&out);
    assert!(lo < 0.5 && 0.5 < hi);
}

#[test]
fn er_estimate_reads_edge_lists() {
    let mut edges = String::new();
    for i in 0..8 {
        for j in i + 1..8 {
            edges.push_str(&format!("{i} {j}\n"));
        }
    }
    let out = run(&["er-estimate"], &edges);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some("1"));
}

#[test]
fn simulate_is_byte_reproducible() {
    let args = [
        "simulate", "--method", "binom-robust", "--m", "5", "--p", "0.2", "--n", "100", "--eps",
        "0.05", "--eps-max", "0.1", "--reps", "30", "--seed", "9",
    ];
    let a = run(&args, "");
    let b = run(&args, "");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("method,m,n,p,"));
}

#[test]
fn simulate_reads_config_arrays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        r#"[{"method":"poisson-robust","lambda":1.5,"n":50,"replications":10},
            {"method":"bernoulli","m":1,"p":0.5,"n":50,"replications":10}]"#,
    )
    .unwrap();
    let out = run(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()],
        "",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"method":"bernoulli","m":1,"p":0.5,"n":10,"repetitions":5}"#).unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn adversary_check_passes_by_default() {
    let out = run(&["adversary-check"], "");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}
