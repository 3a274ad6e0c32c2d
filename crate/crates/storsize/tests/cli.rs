use std::path::Path;
use std::process::Command;

use serde_json::Value;
use storsize::cli::run;
use storsize::io::save_scenario;
use storsize_core::scenario::{Scenario, SystemParams, Tariff, TimeSeries};

fn storsize(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("storsize").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.trim()).expect("valid JSON on stdout")
}

/// Load always above the peak limit with no PV.
fn write_always_over_peak(dir: &Path) -> String {
    let params = SystemParams { d: 500.0, ..SystemParams::default() };
    let sc = Scenario::new(
        TimeSeries::new(0.0, 1.0, vec![0.0; 24]).unwrap(),
        TimeSeries::new(0.0, 1.0, vec![1000.0; 24]).unwrap(),
        Tariff::summer_tou(),
        params,
    )
    .unwrap();
    save_scenario(&sc, dir, "over").unwrap().display().to_string()
}

#[test]
fn check_passes_on_residential() {
    let (code, out, _) = storsize(&["check"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["assumptions"]["assumption1"], Value::Bool(true));
}

#[test]
fn check_exits_2_when_every_sample_must_discharge() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_always_over_peak(dir.path());
    let (code, out, err) = storsize(&["check", "--scenario", &path]);
    assert_eq!(code, 2, "{err}");
    assert_eq!(json(&out)["assumptions"]["assumption1"], Value::Bool(false));
    assert!(err.contains("feasibility"));
}

#[test]
fn zero_capacity_dispatch_matches_j_max() {
    let (code, out, _) = storsize(&["bounds", "--load", "commercial"]);
    assert_eq!(code, 0);
    let j_max = json(&out)["bounds"]["j_max"].as_f64().unwrap();
    let (code, out, _) = storsize(&["dispatch", "--load", "commercial", "--c-ref", "0"]);
    assert_eq!(code, 0);
    let j = json(&out)["j"].as_f64().unwrap();
    assert!((j - j_max).abs() <= 1e-9, "{j} vs {j_max}");
}

#[test]
fn infeasible_dispatch_exits_2_and_names_step() {
    let (code, _, err) = storsize(&["dispatch", "--c-ref", "0"]);
    assert_eq!(code, 2);
    assert!(err.contains("step 19"), "{err}");
}

#[test]
fn size_lands_in_bracket_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let (code, out, err) =
        storsize(&["size", "--tau-cap", "100", "--algorithm", "bisect", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let c = v["results"][0]["c_critical"].as_f64().unwrap();
    let lb = v["bounds"]["c_lb"].as_f64().unwrap();
    let ub = v["bounds"]["c_ub"].as_f64().unwrap();
    assert!(c >= lb - 100.0 && c <= ub, "{lb} <= {c} <= {ub}");
    let trace = std::fs::read_to_string(out_dir.join("trace_bisect.csv")).unwrap();
    assert!(trace.starts_with("c_ref_wh,j_dollars\n"));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let a = storsize(&["dispatch", "--c-ref", "12000"]);
    let b = storsize(&["dispatch", "--c-ref", "12000"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn synth_round_trip_gives_same_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) =
        storsize(&["synth", "--days", "2", "--load", "commercial", "--out", dir.path().to_str().unwrap(), "--name", "c2"]);
    assert_eq!(code, 0, "{err}");
    let path = json(&out)["descriptor"].as_str().unwrap().to_string();
    let from_file = storsize(&["bounds", "--scenario", &path]);
    let direct = storsize(&["bounds", "--days", "2", "--load", "commercial"]);
    assert_eq!(from_file.1, direct.1);
}

#[test]
fn bad_param_is_validation_error() {
    let (code, _, err) = storsize(&["bounds", "--param", "eta_b=1.5"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = storsize(&["bounds", "--param", "nonsense=1"]);
    assert_eq!(code, 1);
}

#[test]
fn dispatch_files_written() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = storsize(&["dispatch", "--c-ref", "8000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let rows = storsize::io::load_dispatch_csv(&dir.path().join("dispatch.csv")).unwrap();
    assert_eq!(rows.len(), 24);
    let summary = json(&std::fs::read_to_string(dir.path().join("dispatch_summary.json")).unwrap());
    assert_eq!(summary["c_ref"].as_f64(), Some(8000.0));
}

#[test]
fn binary_reports_exit_code() {
    let status = Command::new(env!("CARGO_BIN_EXE_storsize")).args(["dispatch", "--c-ref", "0"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = Command::new(env!("CARGO_BIN_EXE_storsize")).args(["check"]).output().unwrap();
    assert_eq!(status.status.code(), Some(0));
}
