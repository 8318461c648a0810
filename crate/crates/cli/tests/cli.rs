use std::path::Path;
use std::process::{Command, Output};

use bf_core::closed_form::flat_quadruple;
use bf_core::Complex64;
use serde_json::Value;

fn bf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bf"))
        .args(args)
        .env("BF_THREADS", "2")
        .output()
        .expect("spawn bf")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/bf-output-1.json");
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&raw).unwrap()
}

fn assert_valid(doc: &Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn field(rec: &csv::StringRecord, j: usize) -> f64 {
    rec[j].parse().unwrap()
}

#[test]
fn coeffs_rows() {
    let out = bf(&["coeffs", "--kappa-grid", "0,0.1547005,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 3);
    for j in 1..7 {
        assert_eq!(field(&rows[0], j), 1.0);
    }
    assert_eq!(&rows[0][7], "Unstable");
    assert_eq!(&rows[1][7], "Critical");
    assert!(field(&rows[1], 5).abs() < 1e-6);
    assert_eq!(&rows[2][8], "SingularKappa");
    assert_eq!(&rows[2][1], "");
}

#[test]
fn coeffs_csv_round_trips() {
    let out = bf(&["coeffs", "--kappa-grid", "0.6:1.9:7"]);
    let rows = csv_rows(&stdout(&out));
    for r in &rows {
        let kappa = field(r, 0);
        let ewb = bf_core::closed_form::whitham_benjamin(kappa).unwrap();
        assert_eq!(field(r, 5), ewb);
        assert_eq!(format!("{:.16e}", field(r, 5)), &r[5]);
    }
    assert!(!stdout(&out).contains('\r'));
}

#[test]
fn figure8_rejects_stable_kappa() {
    let out = bf(&["figure8", "--kappa", "0.3", "--eps", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn figure8_lower_half_plane_for_large_kappa() {
    let out = bf(&["figure8", "--kappa", "1.5", "--eps", "0.01", "--samples", "12", "--K", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert!(rows.len() >= 12);
    for r in &rows {
        assert!(field(r, 0) > 0.0);
        assert!(field(r, 2) < 0.0, "im_lambda1p = {}", &r[2]);
    }
}

#[test]
fn figure8_growth_rate_scale() {
    let out = bf(&["figure8", "--kappa", "0", "--eps", "0.01", "--samples", "16", "--K", "16"]);
    let rows = csv_rows(&stdout(&out));
    let max_re = rows.iter().map(|r| field(r, 1).abs()).fold(0.0, f64::max);
    let max_pred = rows.iter().map(|r| field(r, 5).abs()).fold(0.0, f64::max);
    assert!((max_re / max_pred - 1.0).abs() < 0.1, "{max_re} vs {max_pred}");
}

#[test]
fn flat_spectrum_matches_closed_forms() {
    let (kappa, mu) = (0.05, 0.05);
    let out = bf(&["spectrum", "--kappa", "0.05", "--eps", "0", "--mu", "0.05", "--K", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid(&doc);
    let data = &doc["data"];
    assert_eq!(data["pairing"]["pass"], true);
    assert!(data["residual"]["max"].as_f64().unwrap() <= 1e-9);
    let got: Vec<Complex64> = data["quadruple"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| Complex64::new(z["re"].as_f64().unwrap(), z["im"].as_f64().unwrap()))
        .collect();
    let want = flat_quadruple(kappa, mu);
    for w in want {
        assert!(got.iter().any(|g| (g - w).norm() < 1e-10), "{w} not in {got:?}");
    }
    assert!(data["k_doubling"]["delta"].as_f64().unwrap() < 1e-10);
}

#[test]
fn json_outputs_validate() {
    for args in [
        vec!["coeffs", "--kappa-grid", "0:1:5", "--format", "json"],
        vec!["spectrum", "--kappa", "0.05", "--eps", "0.01", "--mu", "0.002", "--K", "12"],
        vec!["stokes-residual", "--kappa", "0.2", "--format", "json"],
        vec!["mu-bar", "--kappa", "0", "--eps", "0.01", "--K", "12", "--samples", "8", "--format", "json"],
        vec!["figure8", "--kappa", "0", "--eps", "0.01", "--K", "12", "--samples", "8", "--format", "json"],
        vec!["validate", "--criteria", "1,4", "--format", "json"],
        vec!["spectrum", "--kappa", "0.5", "--eps", "0", "--mu", "0.1"],
    ] {
        let out = bf(&args);
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_valid(&doc);
    }
}

#[test]
fn structured_error_for_domain_failure() {
    let out = bf(&["spectrum", "--kappa", "0.5", "--eps", "0", "--mu", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["status"], "error");
    assert_eq!(doc["error"]["kind"], "SingularKappa");
}

#[test]
fn validate_passes() {
    let out = bf(&["validate"]);
    let report = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{report}");
    assert_eq!(csv_rows(&stdout(&out)).len(), 12);
}

#[test]
fn injected_sign_error_fails() {
    let out = bf(&["validate", "--criteria", "2", "--inject-e22-sign-error"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_output_directory_is_io_error() {
    let out = bf(&["validate", "--out", "/nonexistent/bf/report.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_file_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"kappa_grid": "0:1:3", "format": "json"}"#).unwrap();
    let target = dir.path().join("coeffs.csv");
    let out = bf(&[
        "coeffs",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let rows = csv_rows(&std::fs::read_to_string(&target).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(field(&rows[1], 0), 0.5);
}

#[test]
fn rejects_out_of_range_settings() {
    assert_eq!(bf(&["coeffs", "--K", "4"]).status.code(), Some(2));
    assert_eq!(bf(&["spectrum", "--kappa", "0.1", "--eps", "0.2", "--mu", "0.1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(bf(&["coeffs", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bf(&["coeffs", "--config", "/nonexistent.json"]).status.code(), Some(3));
}
