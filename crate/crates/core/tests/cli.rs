use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phonon-dd"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_to(dir: &Path, file: &str, args: &[&str]) -> String {
    let path = dir.join(file);
    run_ok(bin().arg("run").args(args).arg("--out").arg(&path));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn fig2a_full_transfer_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run_to(dir.path(), "a.csv", &["fig2a"]);
    assert!(csv.starts_with("tau_us,P10,P01,shots\n"));
    let row = csv.lines().find(|l| l.starts_with("250.000000,")).expect("row at 250 µs");
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[2], "1.000000");
    assert_eq!(cells[1], "0.000000");
}

#[test]
fn exact_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(dir.path(), "a.csv", &["fig2b"]);
    let b = run_to(dir.path(), "b.csv", &["fig2b"]);
    assert_eq!(a, b);
}

#[test]
fn manifest_sidecar_is_written() {
    let dir = tempfile::tempdir().unwrap();
    run_to(dir.path(), "m.csv", &["fig2a", "--seed", "11"]);
    let text = std::fs::read_to_string(dir.path().join("m.manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["scenario"], "fig2a");
    assert_eq!(v["seed"], 11);
    assert_eq!(v["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn missing_scenario_file_fails_with_diagnostic() {
    let out = bin().args(["run", "/nonexistent/nowhere.toml"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "{err}");
    assert!(err.contains("nowhere.toml"), "{err}");
}

#[test]
fn malformed_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "name = \"bad\"\n[layout]\nions = 2\nfock_cutoff = 0\n").unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn presets_listing() {
    let out = run_ok(bin().arg("presets"));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    for name in ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5b", "fig6b"] {
        let line = lines.iter().find(|l| l.starts_with(name)).expect(name);
        assert!(line.contains("figure "), "{line}");
    }
    assert!(text.contains("figure 5(b)"));
}

#[test]
fn sampled_output_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("t{threads}.csv"));
        run_ok(
            bin()
                .env("PHONON_DD_THREADS", threads)
                .args(["run", "fig5b", "--shots", "50", "--tau-step", "25", "--out"])
                .arg(&path),
        );
        outputs.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].lines().nth(1).unwrap().ends_with(",50"));
}

#[test]
fn calibration_rejects_unreachable_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["calibrate-dephasing", "--target", "0.6", "--out"])
        .arg(dir.path().join("x.toml"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!dir.path().join("x.toml").exists());
}

#[test]
fn calibration_overlay_feeds_run() {
    let dir = tempfile::tempdir().unwrap();
    let overlay = dir.path().join("deph.toml");
    run_ok(
        bin()
            .args(["calibrate-dephasing", "--target", "0.08", "--out"])
            .arg(&overlay),
    );
    let text = std::fs::read_to_string(&overlay).unwrap();
    let v: toml::Value = toml::from_str(&text).unwrap();
    let khz = v["noise"]["dephasing_sideband_khz"].as_float().unwrap();
    assert!((khz - 4.925198).abs() < 1e-3, "{khz}");

    let csv = run_to(
        dir.path(),
        "o.csv",
        &["fig2a", "--overlay", overlay.to_str().unwrap(), "--tau-step", "125"],
    );
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn selftest_passes() {
    let out = run_ok(bin().arg("selftest"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("FAIL"), "{text}");
}
