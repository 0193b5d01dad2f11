use std::path::Path;
use std::process::{Command, Output};

use ksgeo::formats::{parse_trajectory_csv, parse_trajectory_json, SpectrumFile};
use ksgeo::ks_check::KsCheckReport;

fn ksgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksgeo"))
        .args(args)
        .env_remove("KSGEO_CONFIG")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn summary_field<'a>(text: &'a str, key: &str) -> &'a str {
    let start = text
        .find(key)
        .unwrap_or_else(|| panic!("{key} missing from {text}"))
        + key.len();
    text[start..].split(';').next().unwrap().trim()
}

#[test]
fn infall_summary_reports_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("infall.csv");
    let out = ksgeo(&[
        "geodesic",
        "--mass",
        "1",
        "--spin",
        "0",
        "--energy",
        "0",
        "--angmom",
        "0",
        "--r0",
        "2",
        "--direction",
        "infall",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    let span: f64 = summary_field(&err, "tau span:").parse().unwrap();
    assert!((span - std::f64::consts::PI).abs() < 1e-6, "{err}");
    let drift: f64 = summary_field(&err, "max normalization drift:")
        .parse()
        .unwrap();
    assert!(drift <= 1e-9);
    let rows = parse_trajectory_csv(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(rows.len() > 10);
    assert_eq!(rows[0].r, 2.0);
    assert!(out.stdout.is_empty());
}

#[test]
fn spin_above_mass_exits_2() {
    let out = ksgeo(&["geodesic", "--mass", "1", "--spin", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("spin exceeds mass"));
}

#[test]
fn kerr_summary_lists_roots_of_delta() {
    let out = ksgeo(&[
        "geodesic", "--mass", "1", "--spin", "0.6", "--energy", "0", "--angmom", "0", "--r0", "1.8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // m ± √(m² − a²) = 1 ± 0.8
    assert!(
        stderr(&out).contains("turning points: [0.2, 1.8]"),
        "{}",
        stderr(&out)
    );
    let rows = parse_trajectory_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((rows.last().unwrap().r - 0.2).abs() < 1e-9);
}

#[test]
fn invalid_inputs_exit_2() {
    for args in [
        &["geodesic", "--r0", "3"][..],
        &["geodesic", "--mass", "-1"],
        &["geodesic", "--rel-tol", "0"],
        &["geodesic", "--bogus"],
        &["spectrum", "--grid-points", "2000"],
        &["ks-check", "--samples", "0"],
    ] {
        let out = ksgeo(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unresolvable_plunge_exits_3() {
    let out = ksgeo(&[
        "geodesic", "--energy", "0.98", "--angmom", "3", "--r0", "10",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn ks_check_passes_and_is_reproducible() {
    let a = ksgeo(&["ks-check", "--samples", "10000", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let report: KsCheckReport = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.identities.len(), 5);
    assert!(report.identities.iter().all(|o| o.max_residual < 1e-12));
    let b = ksgeo(&["ks-check", "--samples", "10000", "--seed", "42"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ks_check_fault_exits_4_naming_the_identity() {
    let out = ksgeo(&["ks-check", "--samples", "50", "--fault", "ks-matrix-sign"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("orthogonality"));
}

#[test]
fn spectrum_levels_and_claim_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.json");
    let out = ksgeo(&[
        "spectrum",
        "--n-max",
        "3",
        "--grid-points",
        "2001",
        "--grid-halfwidth",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let file: SpectrumFile =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file.schema_version, 1);
    let degeneracies: Vec<u64> = file.levels.iter().map(|l| l.degeneracy).collect();
    assert_eq!(degeneracies, [1, 4, 10, 20]);
    for (level, expected) in file.levels.iter().zip([4.0, 6.0, 8.0, 10.0]) {
        assert!((level.numeric_energy - expected).abs() < 1e-3);
    }
    assert!((file.claim_comparison - 3.0).abs() < 1e-3);
    assert_eq!(file.grid.points, 2001);
    assert_eq!(file.grid.spacing, 16.0 / 2000.0);
}

#[test]
fn narrow_grid_exits_3() {
    let out = ksgeo(&["spectrum", "--n-max", "3", "--grid-halfwidth", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn verify_fault_exits_5_naming_orthogonality() {
    let out = ksgeo(&["verify", "--quick", "--fault", "ks-matrix-sign"]);
    assert_eq!(out.status.code(), Some(5));
    let err = stderr(&out);
    let last = err.lines().last().unwrap();
    assert!(
        last.contains("6 (") && last.contains("orthogonality"),
        "{last}"
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert!(report["failed"].as_array().unwrap().contains(&6.into()));
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_and_env_var_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ksgeo.toml");
    write(
        &cfg,
        "[geodesic]\nmass = 2.0\nspin = 1.2\nr0 = 3.6\nformat = \"json\"\n",
    );

    let out = ksgeo(&["--config", cfg.to_str().unwrap(), "geodesic"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // m = 2, a = 1.2: roots 2 ± 1.6
    assert!(
        stderr(&out).contains("turning points: [0.4, 3.6]"),
        "{}",
        stderr(&out)
    );
    let file = parse_trajectory_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(file.metadata.params.mass(), 2.0);

    let out = Command::new(env!("CARGO_BIN_EXE_ksgeo"))
        .args(["geodesic", "--spin", "0", "--r0", "4", "--format", "csv"])
        .env("KSGEO_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let span: f64 = summary_field(&stderr(&out), "tau span:").parse().unwrap();
    assert!((span - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("tau,t,r,"));

    write(&cfg, "[geodesic]\nmas = 2.0\n");
    let out = ksgeo(&["--config", cfg.to_str().unwrap(), "geodesic"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ksgeo(&[
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
        "geodesic",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
