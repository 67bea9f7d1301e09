use std::path::Path;
use std::process::{Command, Output};

const SIM: &str = r#"
[grid]
counts = [12, 4, 10]
[family]
kind = "sub_case_i"
a = 1
b = 1
rho = 1
r = 1
[fit]
method = "family"
family = "sub_case_i"
init = { a = 1.2, b = 0.8, rho = 1.2, r = 0.8 }
"#;

fn iverson(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iverson"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn simulate_then_fit_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sim.toml"), SIM).unwrap();
    let out = iverson(&["simulate", "--config", "sim.toml", "--out", "sim"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sim/samples.csv").exists());

    let out = iverson(
        &["fit", "--config", "sim.toml", "--input", "sim/samples.csv", "--out", "fit"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&dir.path().join("fit"));
    assert_eq!(rep["command"], "fit");
    assert_eq!(rep["pass"], true);

    let out = iverson(&["report", "--input", "fit/report.json", "--out", "fit"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("fit/report.txt")).unwrap();
    assert!(text.contains("overall: pass"), "{text}");
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sim.toml"), SIM).unwrap();
    let out = iverson(
        &["simulate", "--config", "sim.toml", "--grid", "5,4,4", "--seed", "7", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&dir.path().join("o"));
    assert_eq!(rep["config"]["seed"], 7);
    let rows = std::fs::read_to_string(dir.path().join("o/samples.csv")).unwrap().lines().count();
    // header plus 5 x values times 4 s values
    assert_eq!(rows, 1 + 5 * 4);
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = iverson(&["check", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    std::fs::write(dir.path().join("bad.toml"), "command = \"check\"\nbogus = 1\n").unwrap();
    let out = iverson(&["--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = iverson(&["check", "--grid", "3,x,3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
