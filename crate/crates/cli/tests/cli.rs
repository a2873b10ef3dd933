use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fraclap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FRACLAP_OUT")
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_exit_codes_follow_the_margin() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["certify", "--lhs-fraction", "0.5"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&tmp.path().join("certificate.json"));
    assert_eq!(doc["certificate"]["pass"], Value::Bool(true));
    assert!((doc["certificate"]["lhs"].as_f64().unwrap() - 0.125).abs() < 1e-14);

    let o = fraclap(&["certify", "--lhs-fraction", "1.5"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let o = fraclap(&["certify", "--amplitude", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let doc = json(&tmp.path().join("certificate.json"));
    assert_eq!(doc["certificate"]["degenerate"], Value::Bool(true));
}

#[test]
fn invalid_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--alpha", "1.99"][..],
        &["solve", "--n", "34"],
        &["solve", "--p", "1"],
        &["certify", "--amplitude", "-1"],
        &["sweep", "--lambda-lo", "3", "--lambda-hi", "2"],
        &["kernel", "--alpha", "2.5", "--green", "0,0"],
        &["kernel", "--green", "0.1;0.2"],
        &["kernel", "--d", "2", "--green", "0.1,0.2"],
    ] {
        let o = fraclap(args, tmp.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    }
}

#[test]
fn solve_writes_both_branches() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["solve", "--alpha", "1.2", "--p", "3"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&tmp.path().join("report.json"));
    assert_eq!(r["distinct"], Value::Bool(true));
    assert!(r["distance"].as_f64().unwrap() > r["radii_gap"].as_f64().unwrap());
    assert_eq!(r["probes"].as_array().unwrap().len(), 3);
    for f in ["minimal.csv", "second.csv"] {
        let text = fs::read_to_string(tmp.path().join(f)).unwrap();
        assert_eq!(text.lines().count(), 66, "{f}");
    }
}

#[test]
fn zero_forcing_reports_only_the_trivial_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["solve", "--amplitude", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&tmp.path().join("report.json"));
    assert_eq!(r["degenerate"], Value::Bool(true));
    assert_eq!(r["minimal"]["sup_norm"].as_f64(), Some(0.0));
    assert!(!tmp.path().join("second.csv").exists());
}

#[test]
fn oversized_forcing_is_a_negative_result() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["solve", "--lhs-fraction", "20"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let r = json(&tmp.path().join("report.json"));
    assert_eq!(r["divergence"]["status"], Value::String("diverged".into()));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("run.conf");
    fs::write(&conf, "# comment\nalpha = 1.8\nlhs_fraction = 0.25\nseed = 9\n").unwrap();
    let conf = conf.to_str().unwrap();
    let o = fraclap(&["certify", "--config", conf, "--seed", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&tmp.path().join("certificate.json"));
    assert_eq!(doc["config"]["alpha"].as_f64(), Some(1.8));
    assert_eq!(doc["config"]["seed"].as_u64(), Some(4));
    assert!((doc["certificate"]["lhs"].as_f64().unwrap() / 0.25 - 0.25).abs() < 1e-13);

    let bad = tmp.path().join("bad.conf");
    fs::write(&bad, "alpah = 1.5\n").unwrap();
    let o = fraclap(&["certify", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(["certify"])
        .env("FRACLAP_OUT", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.join("certificate.json").exists());
}

#[test]
fn forcing_from_csv_defines_the_grid() {
    let tmp = tempfile::tempdir().unwrap();
    fraclap(&["solve", "--n", "33"], tmp.path());
    let csv = tmp.path().join("minimal.csv");
    let out = tmp.path().join("csv-run");
    let o = fraclap(&["certify", "--h-csv", csv.to_str().unwrap(), "--amplitude", "0.1"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out.join("certificate.json"));
    assert_eq!(doc["config"]["grid_n"].as_u64(), Some(33));
}

#[test]
fn lemma_tolerance_override_fails_the_battery() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["lemmas", "--samples", "20"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let o = fraclap(&["lemmas", "--samples", "20", "--tol", "1e-16"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let doc = json(&tmp.path().join("lemmas.json"));
    assert_eq!(doc["report"]["passed"], Value::Bool(false));
}

#[test]
fn sweep_finds_the_fold_above_the_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["sweep", "--steps", "10"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&tmp.path().join("fold.json"));
    assert!(doc["fold_estimate"].as_f64().unwrap() >= doc["lambda_cert"].as_f64().unwrap());
    let rows = fs::read_to_string(tmp.path().join("branches.csv")).unwrap();
    assert!(rows.starts_with("lambda,lhs,certified,minimal,second,extra\n"));
    assert!(rows.lines().count() > 11);
}

#[test]
fn kernel_prints_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["kernel", "--d", "2", "--green", "0.1:0.2,0.3:-0.1", "--w", "0:0,0.5:0"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("green,0.1:0.2,0.3:-0.1,"));
    assert_eq!(fs::read_to_string(tmp.path().join("kernel.csv")).unwrap(), text);
}

#[test]
fn asymmetric_csv_forcing_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fraclap(&["solve", "--n", "33"], tmp.path());
    let text = fs::read_to_string(tmp.path().join("minimal.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    // bump one value left of the centre
    let (x, v) = lines[10].split_once(',').map(|(a, b)| (a.to_owned(), b.parse::<f64>().unwrap())).unwrap();
    lines[10] = format!("{x},{}", v * 1.5);
    let skewed = tmp.path().join("skewed.csv");
    fs::write(&skewed, lines.join("\n") + "\n").unwrap();
    let o = fraclap(&["certify", "--h-csv", skewed.to_str().unwrap(), "--amplitude", "1"], &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn green_function_vanishes_outside_the_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fraclap(&["kernel", "--alpha", "1.5", "--green", "1.2,0", "--green", "0,0.5"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values[0], 0.0);
    assert!(values[1] > 0.0);
}

#[test]
fn lemma_battery_passes_across_orders() {
    let tmp = tempfile::tempdir().unwrap();
    for alpha in ["1.2", "1.8"] {
        let o = fraclap(&["lemmas", "--alpha", alpha], tmp.path());
        assert_eq!(o.status.code(), Some(0), "alpha {alpha}");
    }
}
