//! End-to-end checks of the command-line driver: exit codes, config
//! validation messages, and the dependency guard between subcommands.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kirchhoff-lab")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("klab_cli_{}_{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &std::path::Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn verify_passes_on_constant_fixture() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/constant_m.toml");
    let dir = tmp_dir("verify");
    let out = Command::new(bin())
        .args(["--config", fixture, "--out", dir.to_str().unwrap(), "verify"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("verify.json").exists());
}

#[test]
fn search_absence_is_a_valid_result() {
    // The pohozaev family admits no connection; the run must exit 0 with the
    // absence recorded.
    let dir = tmp_dir("pohozaev");
    let config = write_config(
        &dir,
        "run.toml",
        r#"
        h0 = 0.45
        lambda = 2.0
        nonlinearity.family = "pohozaev"
        nonlinearity.params = [1.0, 1.0]
        search.phase_grid = 8
        search.eps_grid = 3
        search.horizon = 25.0
        search.optimizer_budget = 60
        "#,
    );
    let out = Command::new(bin())
        .args(["--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap(), "search"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("search.json")).unwrap();
    assert!(report.contains("\"accepted\": false"));
    assert!(!dir.join("candidate.json").exists());
}

#[test]
fn glue_without_candidate_is_an_execution_error() {
    let dir = tmp_dir("nocand");
    let config = write_config(
        &dir,
        "run.toml",
        r#"
        h0 = 0.9
        lambda = 2.0
        nonlinearity.family = "plateau"
        nonlinearity.params = [8.0, 0.3, 0.08, 0.03]
        "#,
    );
    let out = Command::new(bin())
        .args(["--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap(), "glue"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing candidate"), "stderr: {stderr}");
}

#[test]
fn config_validation_messages() {
    let dir = tmp_dir("badcfg");
    let bad_lambda = write_config(
        &dir,
        "lambda.toml",
        r#"
        h0 = 1.0
        lambda = 1.0
        nonlinearity.family = "constant"
        nonlinearity.params = [1.0]
        "#,
    );
    let out = Command::new(bin())
        .args(["--config", bad_lambda.to_str().unwrap(), "--out", dir.to_str().unwrap(), "modes"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("λ > 1 required"));

    let unknown_key = write_config(
        &dir,
        "unknown.toml",
        r#"
        h0 = 1.0
        lambda = 2.0
        wavelength = 7.0
        nonlinearity.family = "constant"
        nonlinearity.params = [1.0]
        "#,
    );
    let out = Command::new(bin())
        .args(["--config", unknown_key.to_str().unwrap(), "--out", dir.to_str().unwrap(), "modes"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelength"));
}

#[test]
fn modes_emits_expected_csv_schema() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/constant_m.toml");
    let dir = tmp_dir("modes");
    let out = Command::new(bin())
        .args(["--config", fixture, "--out", dir.to_str().unwrap(), "modes"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("mode_base.csv")).unwrap();
    assert!(csv.starts_with("t,z,dz,energy_residual\n"));
    // Energy residual of the harmonic mode stays at rounding level.
    for line in csv.lines().skip(1).step_by(100) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[3].abs() < 1e-12, "residual {}", cols[3]);
    }
}
