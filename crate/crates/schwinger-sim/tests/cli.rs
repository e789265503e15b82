//! End-to-end checks of the binary: determinism of emitted bytes, thread
//! independence, kind-specific outputs, and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_schwinger-sim")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("schwinger-sim-cli-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const EVOLVE: &str = r#"
kind = "evolve"
seed = 7
[model]
n_sites = 6
w = 1.0
j = 1.0
mass = 1.0
[grid]
stop = 2.0
step = 0.25
unit = "wt"
"#;

const NOISE: &str = r#"
kind = "noise"
seed = 11
[model]
n_sites = 6
w = 1.0
j = 1.0
mass = 1.0
j0 = 16.0
[grid]
stop = 1.5
step = 0.25
unit = "wt"
[trotter]
cycle_time = 0.5
[noise]
delta_j_rel = 0.05
delta_w_rel = 0.025
n_traj = 16
seed = 0
"#;

const COMPARE: &str = r#"
kind = "compare"
seed = 3
[model]
n_sites = 6
w = 1.0
j = 1.0
mass = 1.0
j0 = 16.0
[grid]
stop = 1.5
step = 0.5
unit = "wt"
[trotter]
cycle_times = [0.75, 1.5, 3.0]
"#;

const CONTINUUM: &str = r#"
kind = "continuum"
seed = 5
[grid]
stop = 1.0
step = 0.25
unit = "mt"
[continuum]
g_over_m = 1.0
m_over_w = [1.0]
sizes = [4, 6, 8, 10]
fit_times = [0.5, 1.0]
"#;

#[test]
fn evolve_outputs_and_is_deterministic() {
    let dir = tmp_dir("evolve");
    let cfg = write_config(&dir, "run.toml", EVOLVE);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let status = Command::new(bin())
            .args(["evolve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["nu.csv", "lambda.csv"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} must be byte-identical across reruns");
        assert!(!a.is_empty());
    }
    let nu = std::fs::read_to_string(out_a.join("nu.csv")).unwrap();
    assert_eq!(nu.lines().count(), 1 + 9, "header plus one row per grid point");
    assert!(nu.starts_with("wt,nu\n"));
    let manifest = std::fs::read_to_string(out_a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 7"));
    assert!(manifest.contains("\"tolerance\""), "defaults must be echoed");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn noise_outputs_are_thread_independent() {
    let dir = tmp_dir("noise");
    let cfg = write_config(&dir, "run.toml", NOISE);
    let out_a = dir.join("t1");
    let out_b = dir.join("t4");
    for (out, threads) in [(&out_a, "1"), (&out_b, "4")] {
        let status = Command::new(bin())
            .args(["noise", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out_a.join("nu.csv")).unwrap();
    let b = std::fs::read(out_b.join("nu.csv")).unwrap();
    assert_eq!(a, b, "worker count must not change the ensemble bytes");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("wt,nu,stderr,n_traj\n"));
    assert!(text.lines().nth(2).unwrap().ends_with(",16"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn compare_emits_one_column_per_step_size() {
    let dir = tmp_dir("compare");
    let cfg = write_config(&dir, "run.toml", COMPARE);
    let out = dir.join("out");
    let status = Command::new(bin())
        .args(["compare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("compare_nu.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "wt,exact,trotter_T0.75,trotter_T1.5,trotter_T3");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn continuum_emits_curves_and_extrapolations() {
    let dir = tmp_dir("continuum");
    let cfg = write_config(&dir, "run.toml", CONTINUUM);
    let out = dir.join("out");
    let status = Command::new(bin())
        .args(["continuum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let sub = out.join("mw1");
    for n in [4, 6, 8, 10] {
        assert!(sub.join(format!("kappa_N{n}.csv")).exists());
    }
    let extrap = std::fs::read_to_string(sub.join("extrap_mt0.5.json")).unwrap();
    assert!(extrap.contains("\"kappa_inf\""));
    assert!(extrap.contains("\"fit_order12\""));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_use_exit_code_two() {
    let dir = tmp_dir("bad");
    let cfg = write_config(&dir, "bad.toml", &EVOLVE.replace("n_sites = 6", "n_sites = 7"));
    let output = Command::new(bin())
        .args(["evolve", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("n_sites"), "error must name the field: {stderr}");
    // unknown keys are also configuration errors
    let cfg2 = write_config(&dir, "unknown.toml", &format!("{EVOLVE}\nmystery = 1\n"));
    let output2 = Command::new(bin())
        .args(["evolve", "--config"])
        .arg(&cfg2)
        .output()
        .unwrap();
    assert_eq!(output2.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn kind_mismatch_is_rejected() {
    let dir = tmp_dir("mismatch");
    let cfg = write_config(&dir, "run.toml", EVOLVE);
    let output = Command::new(bin())
        .args(["trotter", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn selftest_passes() {
    let output = Command::new(bin()).arg("selftest").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert!(!stdout.contains("FAIL"));
}
