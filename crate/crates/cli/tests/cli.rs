use std::fs;
use std::process::Command;

fn inflation() -> Command {
    Command::new(env!("CARGO_BIN_EXE_inflation"))
}

#[test]
fn writes_tables_checks_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let status = inflation()
        .args(["exp-growth", "--quiet", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let out = dir.path().join("exp-growth");
    for name in ["series.csv", "fits.csv", "checks.csv", "manifest.json", "growth.svg"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "exp-growth");
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with("config_hash,points,t,"));
}

#[test]
fn failed_checks_give_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    // a one-point ladder cannot show growth, and two equal eps give equal ratios
    fs::write(&cfg, "[linear_inflation]\npoints = 64\neps = [0.05, 0.05]\n").unwrap();
    let status = inflation().args(["linear-inflation", "--quiet", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn bad_configuration_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[exp_growth]\nspeed = 3\n").unwrap();
    let out = inflation().args(["exp-growth", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}
