use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use caputo_series::cli::parse_config;

const REFERENCE: &str = "\
# reference instance
k = 1
m = 0
alpha = 0.5
beta = 1.5
a = 1
b = 1
phi = poly
phi_coefficients = 1
modes = 20
quad_order = 128
";

fn bin(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caputo-series"))
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CAPUTO_SERIES_DIGITS")
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn reference_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), REFERENCE);
    let out = dir.path().join("out");
    let r = bin(&["--strict", "--verify-steps", "4096"], &cfg, &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));

    let sol = fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut lines = sol.lines();
    assert_eq!(lines.next(), Some("x,y,branch,u"));
    assert_eq!(sol.lines().count(), 1 + 41 * 42);
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        assert!(["+", "-", "boundary"].contains(&cols[2]));
        let u: f64 = cols[3].parse().unwrap();
        assert!(u.is_finite());
        // 17 significant digits
        assert_eq!(cols[3].trim_start_matches('-').split('e').next().unwrap().len(), 18);
    }

    let modes = fs::read_to_string(out.join("modes.csv")).unwrap();
    assert!(modes.starts_with("n,lambda,phi_n,delta_n,status\n"));
    assert_eq!(modes.lines().count(), 21);
    assert!(modes.lines().skip(1).all(|l| l.ends_with(",regular")));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    let v = &report["verification"];
    assert!(v["nonlocal_gap_sup"].as_f64().unwrap() <= 1e-4);
    assert!(v["pde_residual_sup"].as_f64().unwrap() <= 5e-3);
    assert_eq!(v["uniqueness"]["unique"], true);
    assert_eq!(v["uniqueness"]["entries"].as_array().unwrap().len(), 20);
    assert_eq!(report["config"]["verify_steps"], 4096);
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in ["modes = 200\nquad_order = 128\n", "bogus = 1\n", "alpha = 1.5\n"] {
        let cfg = write_cfg(dir.path(), text);
        let r = bin(&[], &cfg, &out);
        assert_eq!(r.status.code(), Some(3), "{text}");
        let err = String::from_utf8_lossy(&r.stderr);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error kind="));
    }
    let r = bin(&[], &dir.path().join("missing.cfg"), &out);
    assert_eq!(r.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn dry_run_round_trips_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "k = 2\nm = 0.5\nphi_coefficients = 1, 0.1\nmodes = 8\n");
    let out = dir.path().join("out");
    let r = bin(&["--dry-run", "--seedless"], &cfg, &out);
    assert_eq!(r.status.code(), Some(0));
    assert!(!out.exists());
    let printed = String::from_utf8(r.stdout).unwrap();
    let original = parse_config(&fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_eq!(parse_config(&printed).unwrap(), original);
}

#[test]
fn strict_mode_flags_threshold_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "modes = 4\nquad_order = 32\ntol_nonlocal = 1e-12\n");
    let out = dir.path().join("out");
    let r = bin(&["--verify-steps", "256"], &cfg, &out);
    assert_eq!(r.status.code(), Some(0));
    let r = bin(&["--strict", "--verify-steps", "256"], &cfg, &out);
    assert_eq!(r.status.code(), Some(4));
    assert!(out.join("report.json").exists());
}

#[test]
fn bad_flags_exit_three() {
    let r = Command::new(env!("CARGO_BIN_EXE_caputo-series"))
        .arg("--nope")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn digits_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "modes = 4\nquad_order = 32\ngrid_nx = 5\ngrid_ny = 3\n");
    let out = dir.path().join("out");
    let r = Command::new(env!("CARGO_BIN_EXE_caputo-series"))
        .args(["--verify-steps", "256", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("CAPUTO_SERIES_DIGITS", "6")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    let sol = fs::read_to_string(out.join("solution.csv")).unwrap();
    assert_eq!(sol.lines().nth(1).unwrap(), "0.00000e0,-1.00000e0,boundary,0.00000e0");
}
