//! End-to-end tests of the binary: exit-status contract, manifest
//! presence, and config diagnostics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phaselab"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/{name}.toml"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn list_prints_registered_ids() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = text.lines().collect();
    assert_eq!(ids.len(), 6);
    for id in [
        "exp_energy_equivalence",
        "exp_reachability_gap",
        "exp_q_gaussian",
        "exp_soliton_mass",
        "exp_mrf_vs_mp",
        "exp_noise_ensemble",
    ] {
        assert!(ids.contains(&id), "missing {id}");
    }
}

#[test]
fn validate_accepts_shipped_configs() {
    for name in [
        "energy_equivalence",
        "reachability_gap",
        "q_gaussian",
        "soliton_mass",
        "mrf_vs_mp",
        "noise_ensemble",
    ] {
        let out = bin()
            .args(["validate", "--config"])
            .arg(config_path(name))
            .output()
            .unwrap();
        assert!(out.status.success(), "{name} failed validation");
    }
}

#[test]
fn validate_rejects_malformed_config_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(
        &path,
        "experiment = \"exp_soliton_mass\"\nseed = 1\nmass = \"not a number\"\n",
    )
    .unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("mass"), "diagnostic should name the field: {err}");
}

#[test]
fn validate_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.toml");
    let mut text = std::fs::read_to_string(config_path("soliton_mass")).unwrap();
    text.push_str("\nbogus_key = 3\n");
    std::fs::write(&path, text).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bogus_key"));
}

#[test]
fn unknown_experiment_exits_2_and_lists_ids() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "exp_nonsense",
            "--config",
            config_path("soliton_mass").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("exp_soliton_mass"), "should list ids: {err}");
}

#[test]
fn config_experiment_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "exp_q_gaussian",
            "--config",
            config_path("soliton_mass").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_run_exits_0_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "exp_soliton_mass",
            "--config",
            config_path("soliton_mass").to_str().unwrap(),
            "--out",
            "outdir",
            "--seed",
            "4242",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("outdir/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["all_passed"], true);
    assert_eq!(manifest["seed"], 4242, "--seed must be echoed");
    assert!(dir.path().join("outdir/checks.csv").exists());
    assert!(dir.path().join("outdir/kink.csv").exists());
}

#[test]
fn failing_tolerance_exits_1_but_still_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let strict = dir.path().join("strict.toml");
    let text = std::fs::read_to_string(config_path("soliton_mass"))
        .unwrap()
        .replace("tol_coarse = 0.01", "tol_coarse = 0.000000000001");
    assert!(text.contains("0.000000000001"), "replacement applied");
    std::fs::write(&strict, text).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "exp_soliton_mass",
            "--config",
            strict.to_str().unwrap(),
            "--out",
            "outdir",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("outdir/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["all_passed"], false);
    // The failing value is still recorded.
    let failing = manifest["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "kink_rel_err_coarse")
        .unwrap();
    assert_eq!(failing["passed"], false);
    assert!(failing["measured"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_output_directory_is_created() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "exp_q_gaussian",
            "--config",
            config_path("q_gaussian").to_str().unwrap(),
            "--out",
            "deep/nested/out",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("deep/nested/out/manifest.json").exists());
}
