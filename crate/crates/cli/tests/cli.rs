use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn varlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varlp"))
        .args(args)
        .output()
        .expect("varlp runs")
}

fn with_config(cmd: &str, cfg: &str, extra: &[&str]) -> Output {
    let path = configs().join(cfg);
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    varlp(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn check_reports_touching_failure_with_evidence() {
    let out = with_config("check", "rmk18a.cfg", &[]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["command"], "check");
    assert_eq!(doc["exit_code"], 1);
    let conds = doc["report"]["conditions"].as_array().unwrap();
    let touching = conds.iter().find(|c| c["condition"] == "touching_at_infinity").unwrap();
    assert_eq!(touching["verdict"], "fails");
    assert!(!touching["evidence"].as_array().unwrap().is_empty());
    let embedding = conds.iter().find(|c| c["condition"] == "embedding").unwrap();
    assert_eq!(embedding["verdict"], "holds");
}

#[test]
fn norm_of_constant_exponent_matches_closed_form() {
    let out = with_config("norm", "const_p.cfg", &[]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let norm = doc["report"]["norm"].as_f64().unwrap();
    let rtol = doc["report"]["rtol"].as_f64().unwrap();
    assert!(norm >= 2.0 && norm <= 2.0 * (1.0 + rtol), "{norm}");
}

#[test]
fn modular_of_constant_exponent() {
    let out = with_config("modular", "const_p.cfg", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["report"]["value"].as_f64().unwrap();
    assert!((v - 8.0).abs() <= 1e-12, "{v}");
}

#[test]
fn reproduce_matches_shipped_golden() {
    let out = varlp(&["reproduce", "ex-1.2"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["report"]["golden"], "match");
    assert_eq!(doc["report"]["example"]["verdict"], "fails");
}

#[test]
fn reproduce_detects_a_doctored_golden() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex-1.9a.csv");
    let out = varlp(&["reproduce", "ex-1.9a", "--write-golden", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let (key, _) = lines[1].split_once(',').unwrap();
    lines[1] = format!("{key},1.23456789012e5");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = varlp(&["reproduce", "ex-1.9a", "--golden", path.to_str().unwrap()]);
    let doc = json(&out);
    assert!(
        doc["report"]["golden"]["mismatch"].is_string(),
        "{}",
        doc["report"]["golden"]
    );
}

#[test]
fn unknown_example_is_an_input_error() {
    let out = varlp(&["reproduce", "ex-9.9"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ex-1.2"), "{err}");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let a = with_config("falsify", "step_exponent.cfg", &[]);
    let b = with_config("falsify", "step_exponent.cfg", &[]);
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(a.stdout, b.stdout);
    let a = with_config("constants", "log_holder.cfg", &[]);
    let b = with_config("constants", "log_holder.cfg", &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_embeds_resolved_config() {
    let doc = json(&with_config("check", "step_exponent.cfg", &[]));
    let cfg = &doc["config"];
    assert_eq!(cfg["exponents"]["p"], "2 + chi(2, 3)");
    assert_eq!(cfg["domain"]["h"], 0.01);
    // Defaults are filled in, not omitted.
    assert_eq!(cfg["constants"]["seed"], 7);
    assert_eq!(cfg["norm"]["rtol"], 1e-9);
    assert_eq!(cfg["check"]["conditions"][0], "finite_measure");
}

#[test]
fn falsifier_exit_codes() {
    assert_eq!(with_config("falsify", "step_exponent.cfg", &[]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        "[domain]\nlo = [0.0]\nhi = [3.0]\nh = 0.05\n[exponents]\np = \"2\"\n",
    );
    let out = varlp(&["falsify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["cubes"]["outcome"], "no_violation");
}

#[test]
fn constants_refuses_when_conditions_fail() {
    let out = with_config("constants", "step_exponent.cfg", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["report"]["refused"].is_string());
}

#[test]
fn omega_for_bounded_perturbation() {
    let out = with_config("omega", "bounded_perturbation.cfg", &[]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn maxop_fast_and_oracle_agree() {
    let a = with_config("maxop", "maxop_2d.cfg", &["--csv"]);
    let b = with_config("maxop", "maxop_2d.cfg", &["--csv", "--oracle"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(a.stdout.starts_with(b"x,y,f,mf,start_x,start_y,len\n"));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_toggle_prints_table() {
    let out = with_config("check", "rmk18a.cfg", &["--csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("condition,radius,quantity,value\n"), "{text}");
}

#[test]
fn csv_file_named_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trajectory.csv");
    let text = format!(
        "[domain]\nlo = [0.0]\nhi = [3.0]\nh = 0.01\n[exponents]\np = \"2 + chi(2, 3)\"\n[output]\ncsv = {:?}\n",
        csv.to_str().unwrap()
    );
    let path = write_config(&dir, &text);
    let out = varlp(&["falsify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    json(&out);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.lines().count() > 2, "{table}");
}

#[test]
fn config_syntax_error_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, "[domain]\nlo = [0.0]\nhi = [1.0\nh = 0.1\n");
    let out = varlp(&["norm", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn expression_error_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        "[domain]\nlo = [0.0]\nhi = [1.0]\nh = 0.1\n[exponents]\np = \"chi(0,1\"\nf = \"1\"\n",
    );
    let out = varlp(&["norm", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("offset 7"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, "[domain]\nlo = [0.0]\nhi = [1.0]\nh = 0.1\nstep = 3\n");
    let out = varlp(&["norm", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn parse_check_echoes_canonical_form() {
    let out = varlp(&["parse-check", "2+ (1+x^2)^-1", "chi(0,1"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&out);
    assert_eq!(doc["report"][0]["printed"], "2 + (1 + x^2)^-1");
    assert_eq!(doc["report"][1]["offset"], 7);
    let out = varlp(&["parse-check", "loglog(x)"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bench_reports_identical_results() {
    let out = varlp(&["bench", "--sizes-1d", "32,64", "--sizes-2d", "6", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["report"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["identical"] == true));
}
