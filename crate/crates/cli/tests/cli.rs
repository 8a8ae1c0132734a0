//! End-to-end runs of the `collapse-lab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collapse_lab::report::{emit_report, ExperimentReport, Format};
use collapse_lab_core::seed::{derive_seed, rng_from_seed};
use rand::Rng;
use serde_json::Value;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse-lab"))
        .args(args)
        .current_dir(data_dir())
        .env_remove("COLLAPSE_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> ExperimentReport {
    ExperimentReport::parse(std::str::from_utf8(&out.stdout).unwrap())
        .unwrap_or_else(|e| panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

fn check<'a>(r: &'a ExperimentReport, name: &str) -> &'a collapse_lab::report::CheckRow {
    r.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn measure_matches_golden_file() {
    let out = lab(&[
        "measure",
        "--input",
        "sigma_z.json",
        "--input",
        "plus.json",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read(data_dir().join("measure_seed42.json")).unwrap();
    assert_eq!(out.stdout, golden, "{}", String::from_utf8_lossy(&out.stdout));

    let r = report(&out);
    let summary = &r.checks[0].detail["summary"];
    for pair in summary["distribution"].as_array().unwrap() {
        assert!((pair[1].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
    // both inputs are fixed, so the first uniform of trial 0 decides the first outcome;
    // outcomes are ordered [-1, +1] and sampled by inverse CDF
    let u: f64 = rng_from_seed(derive_seed(42, 0)).random();
    let expected = if u < 0.5 { -1.0 } else { 1.0 };
    assert_eq!(summary["sampled_outcome"].as_f64(), Some(expected));
    let counts: u64 = summary["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c[1].as_u64().unwrap())
        .sum();
    assert_eq!(counts, 1000);
}

#[test]
fn compare_rules_worked_example() {
    let out = lab(&["compare-rules", "--input", "diag112.json", "--input", "psi111.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let summary = &r.checks[0].detail["summary"];
    assert_eq!(summary["trials"], 1);
    assert!((summary["max_luders_vn_dev"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(summary["luders_vn_entry"], serde_json::json!([0, 1]));
    assert!(r.checks.iter().all(|c| c.pass));
}

#[test]
fn p4_scan_small() {
    let out = lab(&["p4-scan", "--dims", "2-8", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.counterexamples.is_empty());
    assert_eq!(r.checks[0].detail["summary"]["trials"], 105);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"counterexamples\": []"));
}

#[test]
fn reports_round_trip_byte_identically() {
    for args in [
        vec!["repeatability", "--trials", "50", "--seed", "3"],
        vec!["dilation-check", "--trials", "20", "--dims", "2-4"],
        vec![
            "min-disturbance",
            "--trials",
            "10",
            "--probes",
            "20",
            "--gen",
            "mults=2:2:1",
        ],
    ] {
        let out = lab(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let again = emit_report(&report(&out), Format::Json).unwrap();
        assert_eq!(again, out.stdout, "{args:?}");
        assert_eq!(lab(&args).stdout, out.stdout, "{args:?}");
    }
}

#[test]
fn rerun_reproduces_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = lab(&[
        "min-disturbance",
        "--input",
        "diag112.json",
        "--trials",
        "5",
        "--probes",
        "30",
        "--outcome",
        "1",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lab(&[
        "rerun",
        "--config",
        first.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["dilation-check", "--trials", "40", "--seed", "8"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_collapse-lab"))
            .args(args)
            .env("COLLAPSE_LAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let plain = report(&lab(&["repeatability", "--trials", "5"]));
    assert_eq!(plain.duration_ms, None);
    let timed = report(&lab(&["repeatability", "--trials", "5", "--timing"]));
    assert!(timed.duration_ms.is_some());
    assert_eq!(timed.config, plain.config);
}

#[test]
fn csv_output() {
    let out = lab(&["repeatability", "--trials", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let names: Vec<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(
        names,
        [
            "luders/repeat_agrees",
            "luders/leaked_probability",
            "vn/repeat_agrees",
            "vn/leaked_probability"
        ]
    );
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| lab(args).status.code();
    // check violation: a zero tolerance cannot absorb rounding
    assert_eq!(
        code(&["compare-rules", "--gen", "mults=2:1", "--trials", "5", "--tol", "0"]),
        Some(1)
    );
    // configuration errors
    assert_eq!(code(&["measure", "--input", "plus.json", "--gen", "rank=1"]), Some(2));
    assert_eq!(
        code(&["measure", "--input", "plus.json", "--input", "psi111.json"]),
        Some(2)
    );
    assert_eq!(
        code(&["measure", "--input", "sigma_z.json", "--input", "psi111.json"]),
        Some(2)
    );
    assert_eq!(code(&["dilation-check", "--rule", "vn"]), Some(2));
    assert_eq!(code(&["measure", "--trials", "0"]), Some(2));
    assert_eq!(code(&["measure", "positional"]), Some(2));
    assert_eq!(code(&["p4-scan", "--input", "plus.json"]), Some(2));
    assert_eq!(code(&["min-disturbance", "--gen", "rank=2"]), Some(2));
    // i/o and parse errors
    assert_eq!(code(&["measure", "--input", "missing.json"]), Some(3));
    assert_eq!(code(&["measure", "--input", "truncated.json"]), Some(3));
    assert_eq!(code(&["rerun", "--config", "truncated.json"]), Some(3));
    // parses, but is not an observable
    assert_eq!(code(&["measure", "--input", "not_hermitian.json"]), Some(4));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn weighted_measure() {
    let out = lab(&[
        "measure",
        "--input",
        "sigma_z.json",
        "--input",
        "plus.json",
        "--rule",
        "weighted",
        "--mean",
        "-1",
        "--sigma",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let entries = &r.checks[0].detail["summary"]["post_state"]["entries"];
    // weights ∝ exp(-d²/2σ²) at distances 0 and 2: (1, e^-8) normalized, on |1⟩ and |0⟩
    let w1 = 1.0 / (1.0 + (-8.0f64).exp());
    assert!((entries[3][0].as_f64().unwrap() - w1).abs() < 1e-12);
    assert!((entries[0][0].as_f64().unwrap() - (1.0 - w1)).abs() < 1e-12);
    assert!(check(&r, "post_state_valid").pass);
}

#[test]
fn report_config_is_a_valid_rerun_input() {
    let out = lab(&[
        "compare-rules",
        "--gen",
        "dim=4,rank=2",
        "--trials",
        "7",
        "--seed",
        "99",
    ]);
    let r = report(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["gen"], serde_json::json!({"dim": 4, "rank": 2}));
    assert_eq!(r.master_seed, 99);
    assert_eq!(r.config.trials, 7);
}
