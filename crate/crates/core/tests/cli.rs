use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], env_out: Option<&Path>, cwd: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superadiabatic"));
    cmd.args(args).current_dir(cwd).env_remove("SUPERADIABATIC_OUT");
    if let Some(dir) = env_out {
        cmd.env("SUPERADIABATIC_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn table1_is_reproducible_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&["table1", "--out", dir.path().to_str().unwrap()], None, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["table1.csv", "table1.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
    let csv = fs::read_to_string(a.path().join("table1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
}

#[test]
fn environment_variable_sets_output_directory() {
    let target = tempfile::tempdir().unwrap();
    let cwd = tempfile::tempdir().unwrap();
    let out = run(&["region", "--samples", "1001"], Some(target.path()), cwd.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.path().join("region.csv").exists());
    assert!(fs::read_dir(cwd.path()).unwrap().next().is_none());

    // an explicit flag wins over the environment
    let flagged = tempfile::tempdir().unwrap();
    let out = run(
        &["region", "--out", flagged.path().to_str().unwrap()],
        Some(target.path()),
        cwd.path(),
    );
    assert!(out.status.success());
    assert!(flagged.path().join("region.csv").exists());
}

#[test]
fn invalid_parameters_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for args in [
        vec!["table1", "--samples", "1000"],
        vec!["table1", "--samples", "101"],
        vec!["populations", "--tf", "-1"],
        vec!["iterate", "--omega0", "0"],
    ] {
        let out = run(&args, Some(p), p);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let cfg = p.join("bad.json");
    fs::write(&cfg, r#"{"unknown_field": 1}"#).unwrap();
    let out = run(&["table1", "--config", cfg.to_str().unwrap()], Some(p), p);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strong.json");
    fs::write(&cfg, r#"{"alpha": -2800.0, "omega0": 30.0, "tf": 0.2, "j_max": 2, "samples": 4001}"#).unwrap();
    let out = run(&["iterate", "--config", cfg.to_str().unwrap()], Some(dir.path()), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let listed = String::from_utf8(out.stdout).unwrap();
    assert!(listed.lines().count() >= 1);
    for line in listed.lines() {
        assert!(Path::new(line).exists(), "{line}");
    }
}

#[test]
fn invariant_pulse_runs_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["invariant", "--samples", "4001"], Some(dir.path()), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
