use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_derham-ns"));
    cmd.env_remove("DERHAM_NS_OUT").env_remove("DERHAM_NS_THREADS");
    cmd
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn bundled_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        derham_ns::cases::SimulationConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn run_with_overrides_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", configs().join("taylor_green.toml").to_str().unwrap()])
        .args(["--nc", "4", "--dt", "0.01", "--tol", "1e-9"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("done: 10 steps"), "{stdout}");
    let rows = csv::Reader::from_path(dir.path().join("diagnostics.csv")).unwrap().records().count();
    assert_eq!(rows, 11);
    assert!(dir.path().join("snapshot_000010.txt").exists());
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", configs().join("taylor_green_broken.toml").to_str().unwrap()])
        .args(["--np", "1", "--nc", "4", "--dt", "0.05"])
        .env("DERHAM_NS_OUT", dir.path())
        .env("DERHAM_NS_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("diagnostics.csv").exists());
}

#[test]
fn converge_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["converge", configs().join("taylor_green.toml").to_str().unwrap()])
        .args(["--meshes", "4,8", "--degrees", "1", "--dt", "0.01"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn failures_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin().args(["run", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let bad = bin()
        .args(["run", configs().join("taylor_green.toml").to_str().unwrap(), "--dt=-1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));

    let cfg = dir.path().join("diverge.toml");
    std::fs::write(
        &cfg,
        "case = \"taylor_green\"\n[grid]\ndegree = 2\nn_patches = [1, 1]\ncells_per_patch = [4, 4]\n\
         [stepper]\ndt = 5.0\npicard_max_iter = 2\n[run]\nt_final = 10.0\n",
    )
    .unwrap();
    let failed = bin().arg("run").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(failed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&failed.stdout).starts_with("failed"));
}
