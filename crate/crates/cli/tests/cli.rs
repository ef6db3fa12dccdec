//! End-to-end tests of the `heavyeig` binary: exit codes, artifact
//! layout, and byte-identical reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(config: &str, out: &Path) -> Output {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("config.json");
    fs::write(&cfg_path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_heavyeig"))
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn empty_config_exits_2() {
    let out = TempDir::new().unwrap();
    let r = run("", out.path());
    assert_eq!(r.status.code(), Some(2), "{r:?}");
}

#[test]
fn unknown_field_exits_2_with_location() {
    let out = TempDir::new().unwrap();
    let r = run(
        r#"{"command":"sample","ensemble":{"kind":"ErdosRenyi","p":2.0,"seed":1},"bogus":1}"#,
        out.path(),
    );
    assert_eq!(r.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&r.stderr);
    assert!(msg.contains("line"), "no location in: {msg}");
}

#[test]
fn missing_required_field_exits_2() {
    let out = TempDir::new().unwrap();
    // mc-cov without n/replicates/points
    let r = run(
        r#"{"command":"mc-cov","ensemble":{"kind":"ErdosRenyi","p":2.0,"seed":1}}"#,
        out.path(),
    );
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn permutation_process_has_zero_boundary() {
    let out = TempDir::new().unwrap();
    let r = run(
        r#"{"command":"process","ensemble":{"kind":"PermutationBaseline","seed":5},
           "n":10,"s_grid":[0.0,0.5,1.0],"t_grid":[0.0,0.5,1.0]}"#,
        out.path(),
    );
    assert_eq!(r.status.code(), Some(0), "{r:?}");
    let csv = fs::read_to_string(out.path().join("b_process.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (s, t, v): (f64, f64, f64) = (
            cols[0].parse().unwrap(),
            cols[1].parse().unwrap(),
            cols[2].parse().unwrap(),
        );
        if s == 0.0 || s == 1.0 || t == 0.0 || t == 1.0 {
            assert_eq!(v, 0.0, "boundary row ({s},{t}) = {v}");
        }
    }
    assert!(out.path().join("manifest.json").exists());
}

#[test]
fn identical_config_gives_byte_identical_csvs() {
    let cfg = r#"{"command":"mc-cov","ensemble":{"kind":"ErdosRenyi","p":2.0,"seed":11},
        "n":40,"replicates":30,
        "points":[{"type":"B","s":0.5,"t":0.5},{"type":"C","s":0.5,"lambda":0.0}]}"#;
    let out1 = TempDir::new().unwrap();
    let out2 = TempDir::new().unwrap();
    assert_eq!(run(cfg, out1.path()).status.code(), Some(0));
    assert_eq!(run(cfg, out2.path()).status.code(), Some(0));
    for f in ["mean.csv", "cov.csv"] {
        let a = fs::read(out1.path().join(f)).unwrap();
        let b = fs::read(out2.path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    // manifest echoes the config and has stable top-level keys
    let m = fs::read_to_string(out1.path().join("manifest.json")).unwrap();
    assert!(m.contains("\"command\": \"mc-cov\""));
    assert!(m.contains("\"library_version\""));
}

#[test]
fn verify_identities_passes_on_er() {
    let out = TempDir::new().unwrap();
    let r = run(
        r#"{"command":"verify-identities","ensemble":{"kind":"ErdosRenyi","p":2.0,"seed":3},
           "n":20,"replicates":15}"#,
        out.path(),
    );
    assert_eq!(r.status.code(), Some(0), "{r:?}");
    let csv = fs::read_to_string(out.path().join("identities.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with("true")), "{csv}");
}

#[test]
fn spectral_cdf_gaussian_runs() {
    let out = TempDir::new().unwrap();
    let r = run(
        r#"{"command":"spectral-cdf","ensemble":{"kind":"GaussianBaseline","sigma":1.0,"seed":1},
           "lambda_grid":[-3.0,0.0,3.0],"eta_schedule":[0.5,0.3],
           "solver":{"max_nodes":2048,"tol":1e-7},"e_window":5.0}"#,
        out.path(),
    );
    assert_eq!(r.status.code(), Some(0), "{r:?}");
    let csv = fs::read_to_string(out.path().join("spectral_cdf.csv")).unwrap();
    let rows: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(rows[0] < 0.1 && (rows[1] - 0.5).abs() < 0.05 && rows[2] > 0.9, "{rows:?}");
}
