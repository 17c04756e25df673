//! End-to-end runs of the `resonance` executable.

use std::process::{Command, Output};

use serde_json::Value;

fn resonance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonance"))
        .args(args)
        .env_remove("RESONANCE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn resonance_report() {
    let v = stdout_json(&resonance(&["resonance", "a=1/9", "b=1/3"]));
    assert_eq!(v["resonant"], true);
    assert_eq!(v["witness"], "(2,1)");
}

#[test]
fn sumdim_reports_drop_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sum.csv");
    let out = resonance(&[
        "sumdim",
        "a=1/9",
        "b=1/3",
        "--k_max",
        "10",
        &format!("output.csv=\"{}\"", csv.display()),
    ]);
    let v = stdout_json(&out);
    assert!(v["estimate"]["value"].as_f64().unwrap() < 0.9464);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,delta,count,log_count\n"));
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn output_is_byte_identical_across_runs_and_workers() {
    let args = [
        "marstrand",
        "a=1/4",
        "b=1/4",
        "level=4",
        "theta_steps=256",
        "k_max=5",
    ];
    let first = resonance(&args);
    assert!(first.status.success());
    let again = resonance(&args);
    let mut threaded: Vec<&str> = vec!["--workers", "3"];
    threaded.extend(args);
    let third = resonance(&threaded);
    assert_eq!(first.stdout, again.stdout);
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "command = \"dim\"\na = \"1/3\"\nk_min = 3\nk_max = 6\n",
    )
    .unwrap();
    let v = stdout_json(&resonance(&[
        "--config",
        path.to_str().unwrap(),
        "--k_max",
        "8",
    ]));
    assert_eq!(v["window"]["k_max"], 8);
}

#[test]
fn dry_run_plans_without_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("never.csv");
    let out = resonance(&[
        "--dry-run",
        "sumdim",
        "a=1/4",
        "b=1/4",
        &format!("output.csv=\"{}\"", csv.display()),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["dry_run"], true);
    assert!(!csv.exists());
}

#[test]
fn render_writes_svg_to_stdout() {
    let out = resonance(&["render", "product", "a=1/9", "b=1/3", "depth=2"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert!(svg.contains("#111111"));
}

#[test]
fn config_errors_are_collected_with_exit_code_2() {
    let out = resonance(&["sumdim", "a=3/4", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    let msgs = err["messages"].as_array().unwrap();
    assert!(msgs.len() >= 3, "{msgs:?}");
    assert!(out.stdout.is_empty());
}

#[test]
fn resource_errors_exit_with_1() {
    let out = resonance(&[
        "sumdim",
        "a=1/4",
        "b=1/3",
        "k_max=14",
        "budget.max_pairs=1000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "resource");
}

#[test]
fn unknown_command_lists_the_available_ones() {
    let out = resonance(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("sumdim") && text.contains("render"));
}
