use std::fs;
use std::process::{Command, Output};

use nikstar::measures::load_preset;

fn nikstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nikstar")).args(args).env_remove("NIKSTAR_PRECISION_BITS").output().unwrap()
}

fn json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(nikstar(&[]).status.code(), Some(2));
}

#[test]
fn unknown_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = nikstar(&["surface", "--config", "no_such_file.json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn report_without_runs_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = nikstar(&["report", "--in", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_with_a_failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    fs::create_dir_all(&run).unwrap();
    let body = r#"{"generated_unix": 0, "body": {"checks": [
        {"name": "a", "anchor": "x", "measured": 0.5, "tolerance": 1.0, "relation": "at_most", "passed": true},
        {"name": "b", "anchor": "x", "measured": 2.0, "tolerance": 1.0, "relation": "at_most", "passed": false}
    ]}}"#;
    fs::write(run.join("checks.json"), body).unwrap();
    let out = dir.path().join("report.json");
    let o = nikstar(&["report", "--in", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let merged = json(&out);
    assert_eq!(merged["body"]["checks"], 2);
    assert_eq!(merged["body"]["failed"], 1);
}

#[test]
fn recurrence_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let o = nikstar(&["recurrence", "--config", "cfg_a", "--n-max", "14", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,lambda,rho,a_n"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.first().unwrap()[0], "2");
    assert_eq!(rows.last().unwrap()[0], "14");
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn surface_passes_for_the_first_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = nikstar(&["surface", "--config", "cfg_a", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).lines().all(|l| l.starts_with("PASS")));
    let doc = json(&out);
    assert_eq!(doc["config_digest"], load_preset("cfg_a").unwrap().digest());
}

#[test]
fn precision_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.json");
    let o = Command::new(env!("CARGO_BIN_EXE_nikstar"))
        .args(["mop", "--config", "cfg_a", "--n", "9", "--out", out.to_str().unwrap()])
        .env("NIKSTAR_PRECISION_BITS", "320")
        .output()
        .unwrap();
    assert!(o.status.success());
    let doc = json(&out);
    assert_eq!(doc["config_digest"], load_preset("cfg_a").unwrap().with_precision(320).digest());
    assert_eq!(doc["second_kind_zeros"][0]["zeros"].as_array().unwrap().len(), 3);
}

#[test]
fn ratio_rejects_rho_outside_the_period() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("g.csv");
    fs::write(&grid, "re,im\n0.5,1.0\n").unwrap();
    let out = dir.path().join("r.csv");
    let o = nikstar(&["ratio", "--config", "cfg_a", "--rho", "6", "--grid", grid.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
