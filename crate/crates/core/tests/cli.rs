use std::path::Path;
use std::process::Command;

fn thermostat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermostat"))
}

fn aps() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs/aps.toml")
        .display()
        .to_string()
}

#[test]
fn simulate_writes_outputs() {
    let out = tempfile::tempdir().unwrap();
    let status = thermostat()
        .args([
            "simulate",
            "--config",
            &aps(),
            "--days",
            "1",
            "--setpoint",
            "25",
            "--out",
        ])
        .arg(out.path())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    assert!(out.path().join("trajectory_simulate.csv").is_file());
    assert!(out.path().join("summary.csv").is_file());
    assert!(out.path().join("report.txt").is_file());
}

#[test]
fn baseline_and_overrides() {
    let out = tempfile::tempdir().unwrap();
    let run = thermostat()
        .args([
            "baseline",
            "-c",
            &aps(),
            "--kind",
            "precool",
            "--set",
            "precool_hours=2",
            "-o",
        ])
        .arg(out.path())
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let traj = std::fs::read_to_string(out.path().join("trajectory_precool.csv")).unwrap();
    // hour 9 stays at the ceiling with a two-hour window
    let row9 = traj.lines().nth(10).unwrap();
    assert!(row9.starts_with("9,9,28,"), "{row9}");
}

#[test]
fn verify_succeeds() {
    let run = thermostat()
        .args(["verify", "--instances", "25"])
        .output()
        .unwrap();
    assert!(run.status.success());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("25/25 instances agree"), "{stdout}");
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["optimize-thermostat", "--config", "/nonexistent/x.toml"],
        vec!["baseline", "--set", "no_such_key=1"],
        vec!["baseline", "--set", "dt_hours=2"],
        vec!["simulate", "--controls", "25,25"],
        vec!["optimize-thermostat", "--exterior-csv", "/nonexistent.csv"],
    ];
    for args in cases {
        let run = thermostat().args(&args).output().unwrap();
        assert!(!run.status.success(), "{args:?}");
        let stderr = String::from_utf8_lossy(&run.stderr);
        assert!(stderr.contains("error"), "{args:?}: {stderr}");
    }
}
