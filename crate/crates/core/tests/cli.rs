use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floquet-lab"))
}

const SMALL: &str = r#"{"scenario":"tiny","model":{"variant":"DrivenTwoLevel","omega0":1.3,"drive_amplitude":0.4,"drive_frequency":1.0},
  "initial_state":{"kind":"floquet_eigenvector","index":1},"grid":{"t1":62.83185307179586,"h":0.015707963267948967},
  "diagnostics":[{"kind":"recurrence","samples":50},{"kind":"energy_series","probe":"sigma_z"}]}"#;

#[test]
fn list_models_is_sorted_with_parameters() {
    let out = bin().arg("list-models").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names.len(), 6);
    assert_eq!(names, sorted);
    assert!(text.lines().all(|l| l.contains(": ") && l.len() > l.find(':').unwrap() + 3));
}

#[test]
fn validate_reports_ok_and_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, SMALL).unwrap();
    let out = bin().arg("validate").arg(&good).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "ok");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, SMALL.replace("0.015707963267948967", "0.0")).unwrap();
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("grid.h"));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, SMALL.replace("DrivenTwoLevel", "Pendulum")).unwrap();
    let err = String::from_utf8(bin().arg("validate").arg(&unknown).output().unwrap().stderr).unwrap();
    assert!(err.contains("model.variant") && err.contains("Pendulum"), "{err}");

    let missing = bin().arg("validate").arg(dir.path().join("absent.json")).output().unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8(missing.stderr).unwrap().contains("file not found"));
}

#[test]
fn run_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.json");
    std::fs::write(&cfg, SMALL).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().env("FLOQUET_LAB_THREADS", "2").arg("run").arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("tiny.report.json")).unwrap()).unwrap();
    assert_eq!(report["entries"].as_array().unwrap().len(), 2);
    assert_eq!(report["entries"][0]["verdict"], "recurrent");
    assert_eq!(report["config"]["scenario"], "tiny");
    let csv = std::fs::read_to_string(out_dir.join("tiny.energy_series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,value"));
    assert_eq!(csv.lines().count(), 4002);
    let v: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(v.is_finite());
}

#[test]
fn empty_diagnostics_exit_zero_and_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, SMALL.replace(r#"[{"kind":"recurrence","samples":50},{"kind":"energy_series","probe":"sigma_z"}]"#, "[]")).unwrap();
    let out = bin().arg("run").arg(&empty).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tiny.report.json")).unwrap()).unwrap();
    assert!(report["entries"].as_array().unwrap().is_empty());

    let failing = dir.path().join("fail.json");
    std::fs::write(&failing, SMALL.replace(r#""kind":"floquet_eigenvector","index":1"#, r#""kind":"basis","index":0"#)).unwrap();
    let out = bin().arg("run").arg(&failing).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("scenario tiny"));
}

#[test]
fn presets_run_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "--preset", "prop32", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ap_scan: ap-consistent") && text.contains("recurrence: recurrent"), "{text}");
    assert!(bin().args(["validate", "--preset", "missing"]).output().unwrap().status.code() == Some(2));
}
