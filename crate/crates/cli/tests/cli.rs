//! End-to-end tests of the `telepovm` binary: exit codes, report files,
//! and replay determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_telepovm"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("telepovm-test-{}-{name}", std::process::id()));
    path
}

/// Drops the timestamp field so two reports can be compared byte-for-byte.
fn strip_timestamp(json: &str) -> String {
    let start = json.find("\"timestamp_unix\":").expect("timestamp present");
    let rest = &json[start..];
    let end = rest.find(',').expect("more fields follow");
    format!("{}{}", &json[..start], &rest[end + 1..])
}

#[test]
fn verify_passes_with_exit_zero() {
    let output = run(&["verify", "--negative-control"]);
    assert!(output.status.success(), "{output:?}");
    let text = stdout(&output);
    assert!(text.contains("PASS povm-validity-sweep"));
    assert!(text.contains("PASS negative-control-perturbed-povm"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn conclusive_run_writes_parseable_json() {
    let path = temp_path("conclusive.json");
    let output = run(&[
        "conclusive",
        "--alpha2",
        "0.8",
        "--trials",
        "5000",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["config"]["command"], "conclusive");
    assert_eq!(report["replay_seed"], 7);
    let rate = report["aggregates"]["success_rate"].as_f64().unwrap();
    assert!((rate - 0.4).abs() < 0.03, "rate {rate}");
    let stderr_field = report["aggregates"]["success_rate_stderr"]
        .as_f64()
        .unwrap();
    let expected = (rate * (1.0 - rate) / 5000.0).sqrt();
    assert!((stderr_field - expected).abs() < 1e-15);
    assert_eq!(report["theory"][0]["name"], "success_probability");
}

#[test]
fn replay_is_byte_identical_up_to_timestamp() {
    let args = [
        "conclusive",
        "--alpha2",
        "0.75",
        "--trials",
        "2000",
        "--seed",
        "99",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    // last stdout line is the JSON report
    let json_a = stdout(&first).lines().last().unwrap().to_string();
    let json_b = stdout(&second).lines().last().unwrap().to_string();
    assert_eq!(strip_timestamp(&json_a), strip_timestamp(&json_b));
}

#[test]
fn different_seeds_differ() {
    let a = run(&[
        "conclusive",
        "--alpha2",
        "0.75",
        "--trials",
        "500",
        "--seed",
        "1",
    ]);
    let b = run(&[
        "conclusive",
        "--alpha2",
        "0.75",
        "--trials",
        "500",
        "--seed",
        "2",
    ]);
    assert_ne!(
        strip_timestamp(stdout(&a).lines().last().unwrap()),
        strip_timestamp(stdout(&b).lines().last().unwrap())
    );
}

#[test]
fn bad_alpha2_is_a_config_error() {
    let output = run(&["conclusive", "--alpha2", "0"]);
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(err.contains("--alpha2"), "{err}");
}

#[test]
fn bad_input_names_the_field() {
    let output = run(&["teleport", "--input", "fish"]);
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(err.contains("--input"), "{err}");
}

#[test]
fn one_bit_on_partial_channel_is_rejected() {
    let output = run(&["teleport", "--one-bit", "--alpha2", "0.8", "--trials", "10"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unwritable_path_is_an_error() {
    let output = run(&["verify", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn csv_enumeration_of_fixed_input() {
    let output = run(&[
        "teleport",
        "--trials",
        "1",
        "--enumerate",
        "--input",
        "0.6,0.8",
        "--format",
        "csv",
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = stdout(&output);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("0,bell=")).collect();
    assert_eq!(rows.len(), 4, "{text}");
    let mass: f64 = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn verification_results_do_not_depend_on_the_seed() {
    let a = run(&["verify", "--seed", "5"]);
    let b = run(&["verify", "--seed", "900"]);
    assert!(a.status.success());
    assert!(b.status.success());
    let checks = |out: &Output| -> Vec<String> {
        stdout(out)
            .lines()
            .filter(|l| l.trim_start().starts_with("PASS") || l.trim_start().starts_with("FAIL"))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(checks(&a), checks(&b));
}

#[test]
fn standard_teleport_on_maximal_channel_reports_unit_fidelity() {
    let output = run(&[
        "teleport", "--alpha2", "0.5", "--trials", "2000", "--seed", "3",
    ]);
    assert!(output.status.success(), "{output:?}");
    let json: serde_json::Value =
        serde_json::from_str(stdout(&output).lines().last().unwrap()).unwrap();
    let mean = json["aggregates"]["mean_fidelity"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 1e-10, "mean fidelity {mean}");
    assert!(stdout(&output).contains("PASS mean-fidelity-one"));
}

#[test]
fn telepovm_sweep_and_single_angle() {
    let sweep = run(&["telepovm"]);
    assert!(sweep.status.success());
    assert!(stdout(&sweep).contains("PASS bell-ancilla-realizes-povm"));
    let single = run(&["telepovm", "--theta", "0.45"]);
    assert!(single.status.success());
}

#[test]
fn ensemble_demo_passes() {
    let output = run(&["ensemble-demo", "--alpha2", "0.8", "--theta", "0.9"]);
    assert!(output.status.success(), "{output:?}");
    let text = stdout(&output);
    assert!(text.contains("PASS two-state-ensemble-members"));
    assert!(text.contains("PASS basis-choice-ensembles-indistinguishable"));
    assert!(text.contains("PASS telepovm-ensemble-uniform"));
}

#[test]
fn out_dir_override_applies_to_relative_paths() {
    let dir = temp_path("outdir");
    std::fs::create_dir_all(&dir).unwrap();
    let output = binary()
        .args(["verify", "--out", "report.json"])
        .env("TELEPOVM_OUT_DIR", &dir)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{output:?}");
    assert!(dir.join("report.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}
