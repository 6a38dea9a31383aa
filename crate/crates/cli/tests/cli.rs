use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kirkwood(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kirkwood"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn table2_matches_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["table2"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let (header, rows) = csv(&dir.path().join("table2.csv"));
    assert_eq!(header, ["ratio", "p", "q", "e_star", "reference", "difference"]);
    assert_eq!(rows.len(), 6);
    for row in rows {
        let diff: f64 = row[5].parse().unwrap();
        assert!(diff.abs() < 1e-5, "{row:?}");
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("table2.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "table2");
    assert_eq!(manifest["file"], "table2.csv");
}

#[test]
fn phi_curve_vanishes_on_symmetry_lines() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["phi", "--p", "1", "--q", "3", "--e", "0.1", "--grid", "64"], dir.path());
    assert!(run.status.success());
    let (header, rows) = csv(&dir.path().join("phi.csv"));
    assert_eq!(header[..2], ["l", "phi"]);
    let value = |i: usize| -> (f64, f64) { (rows[i][0].parse().unwrap(), rows[i][1].parse().unwrap()) };
    let (l0, v0) = value(0);
    let (lh, vh) = value(32);
    assert_eq!(l0, 0.0);
    assert!((lh - PI).abs() < 1e-12);
    assert!(v0.abs() < 1e-12 && vh.abs() < 1e-12);
    let (_, zeros) = csv(&dir.path().join("phi_zeros.csv"));
    assert_eq!(zeros.len(), 2);
    assert!(zeros.iter().all(|z| z[2] == "symmetric"));
    assert!(fs::read_to_string(dir.path().join("phi.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["separatrix", "--p", "2", "--q", "5", "--e", "0.15", "--grid", "40"];
    assert!(kirkwood(&args, a.path()).status.success());
    assert!(kirkwood(&args, b.path()).status.success());
    for file in ["separatrix.csv", "separatrix.manifest.json", "separatrix_slopes.csv", "separatrix.svg"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn equal_p_and_q_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["phi", "--p", "2", "--q", "2"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&run.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["phi", "--bogus"], dir.path());
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn orbit_through_the_planet_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["fixed-points", "--p", "1", "--q", "2", "--e", "0.9"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&run.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("planet"));
}

#[test]
fn json_format_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["fixed-points", "--format", "json", "--section", "pi"], dir.path());
    assert!(run.status.success());
    let rows: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fixed_points.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let kinds: Vec<&str> = rows.iter().map(|r| r["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"hyperbolic") && kinds.contains(&"elliptic"));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fixed_points.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["parameters"]["section"], "pi");
}

#[test]
fn validate_reports_second_order_remainder() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["validate", "--p", "1", "--q", "3", "--e", "0.1"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let (_, rows) = csv(&dir.path().join("validation.csv"));
    let fit = rows.iter().find(|r| r[0] == "first_order_exponent").unwrap();
    let k: f64 = fit[1].parse().unwrap();
    assert!((1.8..=2.2).contains(&k));
    assert!(rows.iter().all(|r| r[4] == "true"), "{rows:?}");
}

#[test]
fn fourier_reports_closed_form_mismatch_and_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let run = kirkwood(&["fourier", "--mmax", "4", "--nmax", "8", "--grid", "128"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let (header, rows) = csv(&dir.path().join("c_star.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for row in &rows {
        let reconciled: f64 = row[col("reconciled_mismatch")].parse().unwrap();
        assert!(reconciled < 1e-10);
    }
    let (_, scaling) = csv(&dir.path().join("coefficient_scaling.csv"));
    for row in scaling {
        assert_eq!(row[2], row[3], "{row:?}");
    }
}
