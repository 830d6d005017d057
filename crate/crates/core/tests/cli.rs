use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn varlen(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varlen"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn pdf_reports_unit_mean() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["pdf", "--gamma-db", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&dir.path().join("pdf.json"));
    assert!((j["mean_t"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(j["threshold_l"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(dir.path().join("pdf.csv")).unwrap();
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header, j);
    assert_eq!(lines.next(), Some("t,pdf,cdf"));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert!(varlen(&["pdf", "--gamma-db", "10"], dir.path()).status.success());
        let sim = ["acf", "--gamma-db", "10", "--mode", "simulate", "--ensemble", "2000", "--seed", "9"];
        assert!(varlen(&sim, dir.path()).status.success());
    }
    for name in ["pdf.csv", "pdf.json", "acf.csv", "acf.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["acf", "--gamma-db", "10", "--mode", "simulate", "--ensemble", "3000"];
    assert!(varlen(&[&args[..], &["--threads", "1"]].concat(), a.path()).status.success());
    assert!(varlen(&[&args[..], &["--threads", "3"]].concat(), b.path()).status.success());
    assert_eq!(std::fs::read(a.path().join("acf.csv")).unwrap(), std::fs::read(b.path().join("acf.csv")).unwrap());
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["pdf", "--gamma-db", "10", "--bogus"][..],
        &["pdf"][..],
        &["pdf", "--gamma-db", "ten"][..],
        &["pdf", "--gamma-db", "10", "--gamma", "10"][..],
        &["pdf", "--gamma-db", "10", "--target-mean", "2"][..],
        &["validate", "--gamma-db", "10", "--ensemble", "0"][..],
        &["psd", "--gamma-db", "10", "--beta", "1.5"][..],
        &["acf", "--gamma-db", "10", "--tau-step", "-0.1"][..],
        &["acf", "--gamma-db", "10", "--mode", "simulate", "--k-symbols", "inf"][..],
    ] {
        assert_eq!(varlen(args, dir.path()).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn raw_gamma_allows_other_mean() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["pdf", "--gamma", "10", "--target-mean", "2"], dir.path());
    assert!(o.status.success());
    assert!((json(&dir.path().join("pdf.json"))["mean_t"].as_f64().unwrap() - 2.0).abs() < 2e-6);
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["psd", "--gamma-db", "5", "--tau-max", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--tau-max"));
}

#[test]
fn limit_curve_starts_at_one_and_tracks_triangle_at_high_snr() {
    let dir = tempfile::tempdir().unwrap();
    assert!(varlen(&["acf", "--gamma-db", "15", "--mode", "analytic-limit", "--tau-max", "3"], dir.path()).status.success());
    let rows = csv_rows(&dir.path().join("acf.csv"));
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 1.0).abs() < 1e-8);
    for r in &rows {
        assert!((r[1] - (1.0 - r[0]).max(0.0)).abs() <= 0.05, "tau={}", r[0]);
    }
}

#[test]
fn finite_mode_accepts_unbounded_train() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["acf", "--gamma-db", "10", "--mode", "analytic-finite", "--k-symbols", "inf"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("acf.json"))["k_symbols"], "inf");
}

#[test]
fn compare_mode_at_ten_db() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["acf", "--gamma-db", "10", "--mode", "compare", "--k-symbols", "100", "--ensemble", "100000"], dir.path());
    assert!(o.status.success());
    let j = json(&dir.path().join("acf.json"));
    assert!(j["max_abs_deviation"].as_f64().unwrap() <= 0.02);
    assert_eq!(j["low_ensemble_warning"], false);
    let rows = csv_rows(&dir.path().join("acf.csv"));
    assert_eq!(rows[0].len(), 5);
    for r in rows {
        assert!((r[3] - (r[2] - r[1])).abs() < 1e-12);
    }
}

#[test]
fn small_ensemble_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    assert!(varlen(&["acf", "--gamma-db", "10", "--mode", "simulate", "--ensemble", "50"], dir.path()).status.success());
    assert_eq!(json(&dir.path().join("acf.json"))["low_ensemble_warning"], true);
}

#[test]
fn psd_writes_spectrum_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["psd", "--gamma-db", "10", "--f-max", "4"], dir.path());
    assert!(o.status.success());
    let j = json(&dir.path().join("psd.json"));
    for key in ["gamma_db", "beta", "obw", "total_power"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert!((j["total_power"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    let rows = csv_rows(&dir.path().join("psd.csv"));
    assert!(rows.iter().all(|r| r[0].abs() <= 4.0 && r[1] >= 0.0));
}

#[test]
fn validate_passes_at_ten_db() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlen(&["validate", "--gamma-db", "10", "--ensemble", "50000"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&dir.path().join("validate.json"));
    assert_eq!(j["ks_pass"], true);
    let (rate, p, se) = (
        j["error_rate"].as_f64().unwrap(),
        j["predicted_error_rate"].as_f64().unwrap(),
        j["error_rate_std_error"].as_f64().unwrap(),
    );
    assert!((rate - p).abs() <= 3.0 * se);
    assert!(j["mean_t_empirical"].as_f64().is_some());
}

#[test]
fn help_exits_cleanly() {
    let o = Command::new(env!("CARGO_BIN_EXE_varlen")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("psd"));
}
