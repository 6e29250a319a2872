use std::f64::consts::PI;
use std::path::Path;

use serde_json::Value;

use super::run;

struct Output {
    code: i32,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

fn sgwave(args: &[&str]) -> Output {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = run(
        std::iter::once("sgwave").chain(args.iter().copied()),
        &mut stdout,
        &mut stderr,
    );
    Output { code, stdout, stderr }
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/sgwave-output.schema.json");
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(v: &Value) {
    let s = schema();
    let errors: Vec<String> = s.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v}");
}

fn json_ok(args: &[&str]) -> Value {
    let out = sgwave(args);
    assert_eq!(out.code, 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&v);
    v
}

fn error_of(args: &[&str], code: i32) -> Value {
    let out = sgwave(args);
    assert_eq!(out.code, code);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid(&v);
    v
}

fn csv_rows(bytes: &[u8]) -> (String, Vec<Vec<f64>>) {
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn soliton_metadata() {
    let v = json_ok(&[
        "soliton",
        "--gamma",
        "0.1",
        "--alpha",
        "1",
        "--format",
        "json",
        "--samples",
        "11",
    ]);
    assert_eq!(v["family"], "soliton");
    assert!((v["v"].as_f64().unwrap() - 0.0783).abs() < 1e-3);
    assert!(v["balance_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["profile"].as_array().unwrap().len(), 11);
}

#[test]
fn antisoliton_moves_backwards() {
    let v = json_ok(&[
        "soliton",
        "--gamma",
        "0.1",
        "--helicity",
        "-1",
        "--format",
        "json",
        "--samples",
        "3",
    ]);
    assert_eq!(v["family"], "antisoliton");
    assert!(v["v"].as_f64().unwrap() < 0.0);
}

#[test]
fn constant_single_row() {
    let out = sgwave(&["constant", "--gamma", "0.5"]);
    assert_eq!(out.code, 0);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, "xi,g,u,phi");
    assert_eq!(rows.len(), 1);
    assert!((rows[0][3] + PI / 6.0).abs() < 1e-15);
}

#[test]
fn constant_with_unstable_state() {
    let out = sgwave(&["constant", "--gamma", "0.5", "--include-unstable"]);
    let (_, rows) = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 2);
    assert!((rows[1][3] - (PI / 6.0 - PI)).abs() < 1e-15);
    let v = json_ok(&["constant", "--gamma", "0.5", "--include-unstable", "--format", "json"]);
    assert_eq!(v["unstable"]["stable"], false);
}

#[test]
fn unit_speed_branch() {
    let v = json_ok(&[
        "array",
        "--gamma",
        "2",
        "--mu",
        "inf",
        "--alpha",
        "1",
        "--format",
        "json",
        "--samples",
        "5",
    ]);
    assert!((v["xi_period"].as_f64().unwrap() - 2.0 * PI / 3f64.sqrt()).abs() < 1e-8);
    assert_eq!(v["mu"], Value::Null);
    assert_eq!(v["mu_infinite"], true);
    assert_eq!(v["v"].as_f64().unwrap(), 1.0);
}

#[test]
fn infinite_mu_needs_large_gamma() {
    let e = error_of(&["array", "--gamma", "0.5", "--mu", "inf"], 2);
    assert_eq!(e["code"], "mu_infinity_requires_gamma_above_one");
}

#[test]
fn array_parameters_are_exclusive() {
    let e = error_of(&["array", "--gamma", "0.5", "--mu", "0.1", "--zm", "0.2"], 2);
    assert_eq!(e["code"], "invalid_argument");
    let e = error_of(&["array", "--gamma", "0.5"], 2);
    assert_eq!(e["code"], "invalid_argument");
}

#[test]
fn array_parameters_agree() {
    let a = json_ok(&[
        "array",
        "--gamma",
        "0.5",
        "--zm",
        "0.5",
        "--format",
        "json",
        "--samples",
        "2",
    ]);
    let mu = a["mu"].as_f64().unwrap().to_string();
    let b = json_ok(&[
        "array",
        "--gamma",
        "0.5",
        "--mu",
        &mu,
        "--format",
        "json",
        "--samples",
        "2",
    ]);
    assert!((a["xi_period"].as_f64().unwrap() - b["xi_period"].as_f64().unwrap()).abs() < 1e-8);
    assert!(a["periodicity_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn mu_above_hat_mu_rejected() {
    let e = error_of(&["half-array", "--gamma", "0.1", "--mu", "0.5"], 2);
    assert_eq!(e["code"], "mu_not_below_hat_mu");
}

#[test]
fn sweep_table() {
    let out = sgwave(&["sweep-hatmu", "--gammas", "0.2,0.05,0.5", "--jobs", "2"]);
    assert_eq!(out.code, 0);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, "gamma,hat_mu,lower32,upper32,mu1");
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.05, 0.2, 0.5]);
    assert!((rows[0][1] / 0.03927 - 1.0).abs() < 0.05);
    for r in &rows {
        assert!(r[2] <= r[1] && r[1] <= r[3]);
    }
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
}

#[test]
fn sweep_independent_of_jobs() {
    let a = sgwave(&["sweep-hatmu", "--count", "6", "--jobs", "1"]);
    let b = sgwave(&["sweep-hatmu", "--count", "6", "--jobs", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_json_and_limit() {
    let v = json_ok(&["sweep-hatmu", "--gammas", "0.3", "--format", "json", "--with-limit"]);
    assert_eq!(v["limit"]["extrapolated"], true);
    assert!((v["limit"]["hat_mu"].as_f64().unwrap() - 1.193).abs() < 0.01);
}

#[test]
fn sweep_rejects_out_of_range_gamma() {
    let e = error_of(&["sweep-hatmu", "--gammas", "0.5,1.0"], 2);
    assert_eq!(e["code"], "gamma_out_of_range");
}

#[test]
fn fixed_point_report() {
    let v = json_ok(&["fixed-point", "--gamma", "0.1"]);
    assert!((v["lambda"].as_f64().unwrap() - 0.2753).abs() < 1e-4);
    assert!(v["shooting_delta"].as_f64().unwrap() <= 1e-7);
    assert!(v["error_bound_mu"].as_f64().is_some());
    assert_eq!(v["forced"], false);
}

#[test]
fn fixed_point_outside_proven_range() {
    let e = error_of(&["fixed-point", "--gamma", "0.2"], 3);
    assert_eq!(e["code"], "not_contractive");
    let v = json_ok(&["fixed-point", "--gamma", "0.2", "--force"]);
    assert_eq!(v["forced"], true);
    assert!(v["shooting_delta"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn verify_each_family() {
    for args in [
        vec!["verify", "soliton", "--gamma", "0.1"],
        vec!["verify", "array", "--gamma", "0.5", "--zm", "0.5"],
        vec!["verify", "half-array", "--gamma", "0.1", "--mu", "0.04"],
        vec!["verify", "constant", "--gamma", "0.3"],
    ] {
        let v = json_ok(&args);
        assert_eq!(v["pass"], true, "{args:?}: {}", v["checks"]);
    }
    let c = json_ok(&["verify", "constant", "--gamma", "0.3"]);
    assert_eq!(c["residual"]["max_residual"].as_f64(), Some(0.0));
    let h = json_ok(&["verify", "half-array", "--gamma", "0.1", "--mu", "0.04"]);
    let rate = h["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "merge_rate")
        .unwrap();
    assert!(rate["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn check_props_seeded() {
    let a = sgwave(&["check-props", "--seed", "11", "--cases", "20"]);
    let b = sgwave(&["check-props", "--seed", "11", "--cases", "20"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_valid(&v);
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn out_file_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("soliton.csv");
    let out = sgwave(&[
        "soliton",
        "--gamma",
        "0.1",
        "--samples",
        "21",
        "--xi-range",
        "-5,5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    let meta: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&meta);
    let (header, rows) = csv_rows(&std::fs::read(&path).unwrap());
    assert_eq!(header, "xi,g,u,phi");
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], -5.0);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
}

#[test]
fn csv_is_reproducible_and_round_trips() {
    let args = ["half-array", "--gamma", "0.1", "--mu", "0.04", "--samples", "50"];
    let a = sgwave(&args);
    let b = sgwave(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for cell in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let x: f64 = cell.parse().unwrap();
        assert_eq!(format!("{x:.16e}"), cell);
    }
}

#[test]
fn bad_flags_report_json() {
    let e = error_of(&["soliton"], 2);
    assert_eq!(e["code"], "invalid_argument");
    let e = error_of(&["soliton", "--gamma", "0.1", "--helicity", "2"], 2);
    assert_eq!(e["code"], "invalid_argument");
    let e = error_of(&["soliton", "--gamma", "1.5"], 2);
    assert!(e["code"].as_str().unwrap().contains("gamma"));
}

#[test]
fn help_exits_zero() {
    let out = sgwave(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep-hatmu"));
}
