//! End-to-end checks of the command-line surface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spiking-bam"))
}

#[test]
fn validate_config_accepts_defaults_and_names_bad_fields() {
    let out = bin().args(["validate-config"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("config ok"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[kernels]\ntau_s = 0.0\n").unwrap();
    let out = bin()
        .args(["--config", bad.to_str().unwrap(), "validate-config"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("tau_s"),
        "error should name the field: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn oracle_subcommand_passes() {
    let out = bin().args(["oracle"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.matches("[PASS]").count() >= 3, "{stdout}");
    assert!(!stdout.contains("[FAIL]"), "{stdout}");
}

#[test]
fn run_then_analyze_is_idempotent_on_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "--seeds",
            "1",
            "--condition",
            "topdown",
            "--out",
            out_dir.to_str().unwrap(),
            "run",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let reports = out_dir.join("reports");
    for file in ["curve.csv", "discrimination.csv", "summary.txt"] {
        assert!(reports.join(file).exists(), "missing report {file}");
    }
    let run_dir = out_dir.join("runs").join("seed1_topdown");
    for file in ["outputs.txt", "raster.csv", "schedule.csv", "weights_t0.txt", "weights_t10000.txt", "weights_t20000.txt"] {
        assert!(run_dir.join(file).exists(), "missing artifact {file}");
    }

    let before = std::fs::read(reports.join("curve.csv")).unwrap();
    let before_disc = std::fs::read(reports.join("discrimination.csv")).unwrap();

    let out = bin()
        .args(["analyze", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(reports.join("curve.csv")).unwrap(), before);
    assert_eq!(
        std::fs::read(reports.join("discrimination.csv")).unwrap(),
        before_disc
    );

    // a foreign artifact directory is refused
    let tampered = dir.path().join("tampered");
    copy_tree(&out_dir, &tampered);
    let mut config = std::fs::read_to_string(tampered.join("config.toml")).unwrap();
    config = config.replace("tau_s = 5.0", "tau_s = 6.0");
    std::fs::write(tampered.join("config.toml"), config).unwrap();
    let out = bin()
        .args(["analyze", tampered.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash"));
}

fn copy_tree(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.path().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), &target).unwrap();
        }
    }
}

#[test]
fn simulate_writes_one_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let out = bin()
        .args([
            "--condition",
            "no-topdown",
            "--out",
            out_dir.to_str().unwrap(),
            "simulate",
            "--seed",
            "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir
        .join("runs")
        .join("seed4_no-topdown")
        .join("outputs.txt")
        .exists());
}
