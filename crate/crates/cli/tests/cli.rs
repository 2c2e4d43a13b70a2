use std::fs;
use std::path::Path;

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["fraclab".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    argv.extend(["--outdir".to_string(), dir.display().to_string(), "--stamp".to_string(), "t".to_string()]);
    fraclab_cli::run(argv)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn norms_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["norms", "--n", "1024", "--s", "0.4"]), 0);
    let csv = fs::read_to_string(dir.path().join("norms-t.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "s,q,gagliardo,tail_bracket,completed,f_pp,f_p2,f_pq,bessel");
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0.4,2,"));
    let report = json(&dir.path().join("norms-t.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["config"]["n"], 1024);
}

#[test]
fn family_runs_carry_member_column() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["embed", "--desc", "family", "--n", "1024", "--L", "20", "--sgrid", "0.2,0.5,0.8"]), 0);
    let csv = fs::read_to_string(dir.path().join("embed-t.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("member,s,"));
    assert_eq!(rows.len(), 1 + 12 * 3);
    let report = json(&dir.path().join("embed-t.json"));
    assert_eq!(report["family"]["members"].as_array().unwrap().len(), 12);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"p": 3, "n": 512, "sgrid": [0.5, 0.9, 0.99]}"#).unwrap();
    assert_eq!(run(dir.path(), &["bbm", "--config", cfg.to_str().unwrap(), "--n", "1024"]), 0);
    let report = json(&dir.path().join("bbm-t.json"));
    assert_eq!(report["config"]["n"], 1024);
    assert_eq!(report["config"]["p"], 3.0);
    assert_eq!(report["members"][0]["records"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_requests_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["bbm", "--p", "0.5"]), 2);
    assert_eq!(run(dir.path(), &["bbm", "--zcut", "30"]), 2);
    assert_eq!(run(dir.path(), &["norms", "--n", "1000"]), 2);
    assert_eq!(run(dir.path(), &["norms", "--desc", "square"]), 2);
    assert_eq!(run(dir.path(), &["nonsense"]), 2);
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"colour": 1}"#).unwrap();
    assert_eq!(run(dir.path(), &["norms", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn numerical_failures_leave_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["norms", "--desc", "tent", "--n", "256"]), 1);
    let record = json(&dir.path().join("norms-t.json"));
    assert_eq!(record["error"]["kind"], "spectral_leakage");
    assert!(!dir.path().join("norms-t.csv").exists());
}

#[test]
fn failed_checks_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // far from s = 1 the scaled value misses the limit
    assert_eq!(run(dir.path(), &["bbm", "--n", "1024", "--sgrid", "0.1,0.2,0.3"]), 1);
    let report = json(&dir.path().join("bbm-t.json"));
    assert_eq!(report["passed"], Value::Bool(false));
}
