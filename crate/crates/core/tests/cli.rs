mod common;

use std::process::{Command, Output};

fn flextariff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flextariff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    common::bundled_dir().join(name).display().to_string()
}

#[test]
fn validates_bundled_tariffs() {
    let out = flextariff(&["validate-tariff", &path("base_b19.json"), &path("storage_option_s.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("summer_peak"));
}

#[test]
fn bad_input_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json").display().to_string();
    assert_eq!(flextariff(&["sweep", "--config", &missing]).status.code(), Some(1));
    assert_eq!(flextariff(&["sweep", "--no-such-flag"]).status.code(), Some(1));
    // A sweep config is not a tariff.
    assert_eq!(flextariff(&["validate-tariff", &path("example.json")]).status.code(), Some(1));
}

#[test]
fn annual_prints_a_line_per_month() {
    let out = flextariff(&[
        "annual",
        "--config",
        &path("example.json"),
        "--flex-pct",
        "0.2",
        "--recovery-hours",
        "2",
        "--power-ratio",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let passes = text.lines().filter(|l| l.starts_with("month ") && l.contains("PASS")).count();
    assert_eq!(passes, 12, "{text}");
    assert!(text.contains("annual bill"));
}

#[test]
fn solve_writes_dispatch_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("dispatch.csv");
    let out = flextariff(&[
        "solve",
        "--config",
        &path("example.json"),
        "--month",
        "2",
        "--flex-pct",
        "0",
        "--power-ratio",
        "0.5",
        "--duration-hours",
        "2",
        "--dispatch-csv",
        &csv.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("timestamp,base_kw,pv_kw"));
    assert_eq!(body.lines().count(), 1 + 28 * 96);
}
