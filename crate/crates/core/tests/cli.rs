use std::path::Path;
use std::process::{Command, Output};

fn chaoslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("CHAOSLAB_THREADS")
        .output()
        .unwrap()
}

const SMALL: &str = r#"{
  "N": 32,
  "N_list": [16, 32, 64],
  "reps": 30,
  "T": 0.1,
  "eps_scale": 0.5,
  "grid": {"L": 8, "M": 256},
  "lln": {"N_list": [16, 32, 64], "reps": 50}
}"#;

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.json"), SMALL).unwrap();
    dir
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn config_errors_exit_with_two() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.json"), r#"{"alpha": 0.6}"#).unwrap();
    let out = chaoslab(&["sweep", "-c", "bad.json", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must lie in (0, 1/2)"));
    std::fs::write(dir.path().join("bad.json"), r#"{"alpha": 0.25, "beta": 0.3}"#).unwrap();
    let out = chaoslab(&["couple", "-c", "bad.json", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta must satisfy 0 < beta <= alpha"));
    let out = chaoslab(&["lln", "-c", "missing.json", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_writes_the_contracted_files_and_refuses_to_overwrite() {
    let dir = setup();
    let out = chaoslab(&["sweep", "-c", "small.json", "--out", "run", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    assert_eq!(listing(&run), ["manifest.json", "rates.json", "sweep_result.csv"]);
    let csv = std::fs::read(run.join("sweep_result.csv")).unwrap();
    assert!(csv.starts_with(b"# master_seed=3\nN,eps,"));
    assert_eq!(csv.iter().filter(|&&b| b == b'\n').count(), 5);

    let again = chaoslab(&["sweep", "-c", "small.json", "--out", "run", "--seed", "3"], dir.path());
    assert_eq!(again.status.code(), Some(4));
    let forced = chaoslab(&["sweep", "-c", "small.json", "--out", "run", "--seed", "3", "--force", "--threads", "1"], dir.path());
    assert!(forced.status.success());
    assert_eq!(std::fs::read(run.join("sweep_result.csv")).unwrap(), csv);

    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 3);
    assert_eq!(manifest["config"]["N_list"], serde_json::json!([16, 32, 64]));
}

#[test]
fn every_subcommand_produces_its_outputs() {
    let dir = setup();
    let cases: [(&str, &[&str]); 5] = [
        ("solve-pde", &["diagnostics.json", "manifest.json", "snapshots.csv"]),
        ("simulate", &["manifest.json", "particles.csv"]),
        ("couple", &["couple.csv", "couple.json", "manifest.json"]),
        ("lln", &["lln.csv", "manifest.json", "rates.json"]),
        ("verify-kernel", &["manifest.json", "violation_report.json"]),
    ];
    for (cmd, files) in cases {
        let out = Command::new(env!("CARGO_BIN_EXE_chaoslab"))
            .args([cmd, "-c", "small.json", "--out", cmd])
            .current_dir(dir.path())
            .env("CHAOSLAB_THREADS", "1")
            .output()
            .unwrap();
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(listing(&dir.path().join(cmd)), files, "{cmd}");
    }
    let snapshots = std::fs::read_to_string(dir.path().join("solve-pde/snapshots.csv")).unwrap();
    assert_eq!(snapshots.lines().nth(1), Some("t,x,rho"));
    let couple = std::fs::read_to_string(dir.path().join("couple/couple.csv")).unwrap();
    assert_eq!(couple.lines().nth(1), Some("replicate_id,t,sup_dev,J,exceeded"));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verify-kernel/violation_report.json")).unwrap()).unwrap();
    assert_eq!(report["violations"], 0);
}
