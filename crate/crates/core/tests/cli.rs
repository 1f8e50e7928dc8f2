use std::path::{Path, PathBuf};
use std::process::Command;

use medbounds::cli::run;
use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run_args(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["medbounds"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, out, String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run_args(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_slice(&out).unwrap()
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn bounds_from_probability_file() {
    let v = json(&["bounds", "--input", &data("uniform.json"), "--estimand", "NDE-000"]);
    assert_eq!(v["estimand"], "NDE-000");
    assert_eq!(v["method"], "closed-form");
    assert_eq!(v["lower"], -0.5);
    assert_eq!(v["upper"], 0.5);
    assert_eq!(v["noninformative"], false);

    let v = json(&["bounds", "--input", &data("uniform.json"), "--estimand", "CDE-00", "--method", "lp", "--exact"]);
    assert_eq!(v["method"], "lp");
    assert_eq!(v["lower"], -0.75);
    assert_eq!(v["upper"], 0.75);
}

#[test]
fn bounds_from_records_with_both_methods() {
    let v = json(&["bounds", "--input", &data("synthetic_trial.csv"), "--estimand", "NDE-000,JNIE-1", "--method", "both"]);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    assert_eq!(reports[0]["method"], "closed-form");
    assert_eq!(reports[1]["method"], "lp");
    let diff = (reports[0]["lower"].as_f64().unwrap() - reports[1]["lower"].as_f64().unwrap()).abs();
    assert!(diff < 1e-12);
}

#[test]
fn bounds_all_uses_the_lp_where_needed() {
    let v = json(&["bounds", "--input", &data("synthetic_trial.csv"), "--estimand", "all"]);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 43);
    let methods: Vec<&str> = reports.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods.iter().filter(|m| **m == "closed-form").count(), 9);
    assert_eq!(methods.iter().filter(|m| **m == "lp").count(), 34);
}

#[test]
fn text_output_rounds_to_four_places() {
    let (code, out, _) = run_args(&["bounds", "--input", &data("synthetic_trial.csv"), "--estimand", "NDE-000", "--format", "text"]);
    assert_eq!(code, 0);
    let s = String::from_utf8(out).unwrap();
    assert!(s.contains("TE 0.2672"), "{s}");
    assert!(s.contains("(-0.3278, 0.6722)"), "{s}");
}

#[test]
fn closed_method_rejects_lp_only_estimands() {
    let (code, out, err) = run_args(&["bounds", "--input", &data("uniform.json"), "--estimand", "NIE1-110", "--method", "closed"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with("error: NoClosedForm"), "{err}");
}

#[test]
fn bad_inputs_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = tmp(&dir, "bad.csv");
    std::fs::write(&bad, "x,m1,m2,y\n0,0,0,0\n1,2,0,1\n").unwrap();
    let (code, _, err) = run_args(&["bounds", "--input", bad.to_str().unwrap(), "--estimand", "TE"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: MalformedInput"), "{err}");

    let unnormalized = tmp(&dir, "p.json");
    let text = std::fs::read_to_string(data("uniform.json")).unwrap().replacen("0.125", "0.5", 1);
    std::fs::write(&unnormalized, text).unwrap();
    let (code, _, err) = run_args(&["bounds", "--input", unnormalized.to_str().unwrap(), "--estimand", "TE"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: ArmNotNormalized"), "{err}");

    let (code, _, err) = run_args(&["bounds", "--input", "trial.txt", "--estimand", "TE"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: MalformedInput"), "{err}");

    let (code, _, err) = run_args(&["bootstrap", "--input", &data("uniform.json"), "--estimand", "TE", "--seed", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("row-level"), "{err}");
}

#[test]
fn bounds_out_file_formats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = tmp(&dir, "b.csv");
    let (code, _, err) = run_args(&[
        "bounds", "--input", &data("synthetic_trial.csv"), "--estimand", "CDE-00,NIE1-110", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "estimand,method,lower,upper,active_lower,active_upper,noninformative");
    assert!(lines.next().unwrap().starts_with("CDE-00,closed-form,"));
    assert!(lines.next().unwrap().starts_with("NIE1-110,lp,"));

    let (code, _, err) = run_args(&["bounds", "--input", &data("uniform.json"), "--estimand", "TE", "--out", "x.parquet"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: InvalidConfig"), "{err}");
}

#[test]
fn verify_reports_agreement() {
    let v = json(&["verify", "--samples", "6", "--seed", "99"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["comparisons"], 48);
    assert!(v["max_abs_diff"].as_f64().unwrap() < 1e-7);
}

#[test]
fn vertices_table() {
    let v = json(&["vertices", "--estimand", "JNIE-1"]);
    assert_eq!(v["total"], 16384);
    let cells = v["cells"].as_array().unwrap();
    let counts: Vec<(i64, i64, u64)> = cells
        .iter()
        .map(|c| (c["lower"].as_i64().unwrap(), c["upper"].as_i64().unwrap(), c["count"].as_u64().unwrap()))
        .collect();
    assert_eq!(counts, [(-1, 0, 6144), (0, 0, 4096), (0, 1, 6144)]);
    assert_eq!(v["widths"]["0"], 4096);

    let dir = tempfile::tempdir().unwrap();
    let csv = tmp(&dir, "v.csv");
    let (code, out, _) = run_args(&["vertices", "--estimand", "MS2NIE1-11", "--method", "cross", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text,
        "estimand,lower,upper,count,proportion\nMS2NIE1-11,-1,0,4096,0.25\nMS2NIE1-11,0,0,8192,0.5\nMS2NIE1-11,0,1,4096,0.25\n"
    );
}

#[test]
fn simulate_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let rows = tmp(&dir, "rows.csv");
    let summary = tmp(&dir, "summary.csv");
    let v = json(&[
        "simulate", "--alphas", "1e-6,1", "--n", "5", "--seed", "4", "--out", rows.to_str().unwrap(), "--summary-out",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(v["summary"].as_array().unwrap().len(), 8);
    let rows = std::fs::read_to_string(rows).unwrap();
    assert_eq!(rows.lines().next().unwrap(), "alpha,replicate,estimand,lower,upper,width,excludes_zero");
    assert_eq!(rows.lines().count(), 1 + 2 * 5 * 4);
    let summary = std::fs::read_to_string(summary).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "alpha,estimand,prop_width_lt_1,prop_excludes_zero,ci_low,ci_high");
    assert_eq!(summary.lines().count(), 9);
}

#[test]
fn bootstrap_report_fields() {
    let v = json(&[
        "bootstrap", "--input", &data("synthetic_trial.csv"), "--estimand", "NDE-000", "--replicates", "200", "--seed", "5",
        "--level", "0.9",
    ]);
    assert_eq!(v["replicates"], 200);
    assert_eq!(v["level"], 0.9);
    assert_eq!(v["seed"], 5);
    let lo = v["lower"].as_f64().unwrap();
    let ci = &v["ci_lower"];
    assert!(ci[0].as_f64().unwrap() <= lo && lo <= ci[1].as_f64().unwrap());
}

#[test]
fn seeded_commands_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3", "8"] {
        let rows = tmp(&dir, &format!("rows{threads}.csv"));
        let (c1, sim, _) = run_args(&[
            "--threads", threads, "simulate", "--alphas", "1e-6,1e-3,1", "--n", "20", "--seed", "77", "--out",
            rows.to_str().unwrap(),
        ]);
        let (c2, boot, _) = run_args(&[
            "--threads", threads, "bootstrap", "--input", &data("synthetic_trial.csv"), "--estimand", "NIE1-110",
            "--replicates", "40", "--seed", "77",
        ]);
        let (c3, ver, _) = run_args(&["--threads", threads, "verify", "--samples", "8", "--seed", "77"]);
        assert_eq!((c1, c2, c3), (0, 0, 0));
        outputs.push((sim, std::fs::read(rows).unwrap(), boot, ver));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn binary_exit_codes_and_thread_variable() {
    let bin = env!("CARGO_BIN_EXE_medbounds");
    let status = Command::new(bin).arg("bounds").output().unwrap();
    assert_eq!(status.status.code(), Some(2));

    let status = Command::new(bin)
        .args(["bounds", "--input", "/nonexistent.csv", "--estimand", "TE"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&status.stderr).starts_with("error: Io"));

    let args = ["simulate", "--alphas", "0.01", "--n", "12", "--seed", "3"];
    let one = Command::new(bin).args(args).env("MEDBOUNDS_THREADS", "1").output().unwrap();
    let many = Command::new(bin).args(args).env("MEDBOUNDS_THREADS", "6").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}
