mod common;

use std::process::{Command, Output};

use hetalloc::report::parse_csv;
use serde_json::json;

fn hetalloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetalloc")).args(args).output().expect("binary runs")
}

fn table3() -> String {
    common::table3_path().to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_reports_counts() {
    let out = hetalloc(&["validate", "--scenario", &table3()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("ok: 15 users, 2 subzones, 2 networks"), "{text}");
}

#[test]
fn run_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = hetalloc(&["run", "--scenario", &table3(), "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let rows = parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 15);
    assert!(rows.windows(2).all(|w| w[0].system_state <= w[1].system_state));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = hetalloc(&["run", "--scenario", "/nonexistent/x.scenario"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error[io]: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    std::fs::write(&path, "{\"schema_version\": 1,\n  \"horizon\": }").unwrap();
    let out = hetalloc(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[parse]: "), "{}", stderr(&out));
}

#[test]
fn escaping_subzone_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("escape.scenario");
    let scenario = json!({
        "schema_version": 1,
        "service_area": {"radius": 100},
        "subzones": [{"id": 7, "center_x": 90, "center_y": 0, "radius": 50, "network": 2}],
        "networks": [
            {"id": 1, "kind": "mobile", "subcarriers": 72, "ofdm_symbols": 7, "bits_per_symbol": 2, "initial_resources": 10},
            {"id": 2, "kind": "wireless", "subcarriers": 128, "ofdm_symbols": 7, "bits_per_symbol": 2, "initial_resources": 10}
        ],
        "mobility": {"mean_speed": 1},
        "users": [],
        "horizon": 2,
        "seed": 0
    });
    std::fs::write(&path, scenario.to_string()).unwrap();
    let out = hetalloc(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error[validation]: "), "{err}");
    assert!(err.contains("Z7"), "{err}");
}

#[test]
fn bad_arguments_are_usage_errors() {
    let out = hetalloc(&["run", "--scenario", &table3(), "--allocator", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[usage]: "), "{}", stderr(&out));

    let out = hetalloc(&["run", "--scenario", &table3(), "--steps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[usage]: "), "{}", stderr(&out));
}

#[test]
fn compare_lists_each_allocator_once() {
    let out = hetalloc(&["compare", "--scenario", &table3(), "--allocators", "dp,round_robin,pf", "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "allocator,total_bits,total_units,blocked_users,blocking_events");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["dp", "round_robin", "pf"]);

    let again = hetalloc(&["compare", "--scenario", &table3(), "--allocators", "dp,round_robin,pf", "--format", "csv"]);
    assert_eq!(text.as_bytes(), again.stdout);
}

#[test]
fn steps_override_changes_the_run() {
    let short = hetalloc(&["run", "--scenario", &table3(), "--format", "csv", "--steps", "1"]);
    let long = hetalloc(&["run", "--scenario", &table3(), "--format", "csv", "--steps", "20"]);
    let total = |o: &Output| parse_csv(&String::from_utf8_lossy(&o.stdout)).unwrap().last().unwrap().system_state;
    assert!(total(&short) < total(&long));
}
