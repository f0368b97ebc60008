use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lightcone::report::{AUDIT_COLUMNS, SCALING_COLUMNS};

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lightcone"));
    cmd.args(args).arg("--out").arg(dir.join("out")).env("LIGHTCONE_THREADS", "2");
    if let Some(text) = config {
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn audit_writes_csv_json_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["audit", "--n", "1", "--budget", "50000", "--seed", "3"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/audit.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), AUDIT_COLUMNS.join(","));
    assert_eq!(lines.count(), 8);
    let report = json(&dir.path().join("out/audit.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["seed"], 3);
    assert_eq!(report["rows"].as_array().unwrap().len(), 8);
    assert_eq!(report["summary"]["mismatch"], 0);
    let meta = json(&dir.path().join("out/metadata.json"));
    assert_eq!(meta["threads"], 2);
    assert!(meta["started_unix"].as_f64().unwrap() > 0.0);
}

#[test]
fn tiny_budget_warns_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["audit", "--budget", "10"], Some("[audit]\nidentities = [\"laplace_power\"]\n"));
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1 inconclusive") && stdout.contains("warning"), "{stdout}");
}

#[test]
fn invalid_config_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["audit"], Some("[audit]\nidentities = [\"nonexistent\"]\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("audit.identities"));

    let out = run(
        dir.path(),
        &["classify"],
        Some("[classify]\nsets = [{ p = 3.0, q = 2.0, alpha = [0.0], beta = [0.0], a = [0.0], b = [0.0] }]\n"),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("classify.sets[0]"));

    let out = run(dir.path(), &["scaling"], Some("[scaling]\ngrid = [1.0, 2.0]\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scaling.grid"));

    let out = run(dir.path(), &["audit"], Some("budget = \"many\"\n"));
    assert_eq!(out.status.code(), Some(2));

    let out = run(dir.path(), &["audit", "--n", "7"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_conflict_is_a_finding() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[classify]\nsets = [\n  { p = 2.0, q = 2.0, alpha = [0.0, 0.0], beta = [0.0, 0.0], a = [0.0, 0.0], b = [0.0, 0.0] },\n  \
               { p = 2.0, q = 2.0, alpha = [0.0, 0.0, 0.0], beta = [-2.5, -2.5, 0.0], a = [0.0, 0.0, 0.0], b = [1.0, 1.0, 1.0] },\n]\n";
    let out = run(dir.path(), &["classify"], Some(cfg));
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/classify.json"));
    let verdicts: Vec<_> =
        report["results"].as_array().unwrap().iter().map(|r| r["result"]["verdict"].as_str().unwrap().to_string()).collect();
    assert_eq!(verdicts, ["BOUNDED", "CONFLICT"]);
}

#[test]
fn worked_witness_passes_and_infeasible_set_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["witness"], None);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("out/witness.json"));
    assert_eq!(report["witnesses"][0]["witness"]["t"], 0.5);

    let cfg = "[witness]\nsets = [{ p = 2.0, q = 2.0, alpha = [0.0], beta = [0.0], a = [0.0], b = [0.0], c = [0.5] }]\n";
    let out = run(dir.path(), &["witness"], Some(cfg));
    assert_eq!(out.status.code(), Some(1));
    let report = json(&dir.path().join("out/witness.json"));
    assert!(report["witnesses"][0]["error"].as_str().unwrap().contains("infeasible"));
}

#[test]
fn scaling_flags_perturbed_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["scaling", "--budget", "20000"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("out/scaling.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), SCALING_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 1 + 2 * 4);

    let cfg =
        "[scaling]\nset = { p = 2.0, q = 2.0, alpha = [0.0, 0.0], beta = [0.0, 0.0], a = [0.0, 0.0], b = [0.0, 0.0], c = [3.5, 3.0] }\n\
               l = [2.0, 2.0]\nr = [4.0, 4.0]\n";
    let out = run(dir.path(), &["scaling", "--budget", "20000"], Some(cfg));
    assert_eq!(out.status.code(), Some(1));
    let report = json(&dir.path().join("out/scaling.json"));
    assert_eq!(report["difference_vanishes"], serde_json::json!([false, true]));
}

#[test]
fn help_lists_subcommands() {
    let out = Command::new(env!("CARGO_BIN_EXE_lightcone")).arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["audit", "classify", "witness", "scaling"] {
        assert!(text.contains(cmd));
    }
}
