use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Copies a fixture into a fresh directory so default artifacts land there.
fn staged(name: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join(name);
    fs::copy(fixture(name), &path).unwrap();
    (dir, path)
}

fn frankl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frankl")).args(args).env_remove("FRANKL_NODE_LIMIT").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_fc_writes_certificate_that_verifies() {
    let (dir, input) = staged("s_prime.fam");
    let out = frankl(&["classify", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cert = dir.path().join("s_prime.cert.json");
    let doc = json(&cert);
    assert_eq!(doc["kind"], "classification");
    assert_eq!(doc["certificate"]["verdict"], "fc");
    assert_eq!(doc["certificate"]["weights"].as_array().unwrap().len(), 6);

    let report = dir.path().join("report.json");
    let out = frankl(&["verify", cert.to_str().unwrap(), "--output", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).trim_end().ends_with("VERIFIED"));
    assert!(report.exists());
}

#[test]
fn printed_weights_are_certified() {
    let (dir, input) = staged("s_prime.fam");
    let out = frankl(&["certify-weights", input.to_str().unwrap(), "--weights", "16,8,12,20,17,15"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&dir.path().join("s_prime.cert.json"));
    assert_eq!(doc["kind"], "weights");
    assert_eq!(doc["verdict"]["outcome"], "certified");
}

#[test]
fn uniform_weights_are_refuted_and_the_refutation_verifies() {
    let (dir, input) = staged("s_prime.fam");
    let out = frankl(&["certify-weights", input.to_str().unwrap(), "--weights", "1,1,1,1,1,1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("refuted"));
    let cert = dir.path().join("s_prime.cert.json");
    assert_eq!(json(&cert)["verdict"]["outcome"], "refuted");
    let out = frankl(&["verify", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn classify_non_fc_exits_one_with_artifact() {
    let (dir, input) = staged("s.fam");
    let out = frankl(&["classify", input.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let cert = dir.path().join("s.cert.json");
    assert_eq!(json(&cert)["certificate"]["verdict"], "non_fc");
    let out = frankl(&["verify", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn tampered_certificate_is_rejected() {
    let (dir, input) = staged("s.fam");
    assert_eq!(code(&frankl(&["classify", input.to_str().unwrap()])), 1);
    let cert = dir.path().join("s.cert.json");
    let mut doc = json(&cert);
    let duals = doc["certificate"]["duals"].as_object_mut().unwrap();
    let key = duals.keys().find(|k| k.as_str() != "normalize").unwrap().clone();
    duals.insert(key, Value::String("1000".into()));
    fs::write(&cert, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = frankl(&["verify", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    assert!(stdout(&out).contains("REJECTED"));
}

#[test]
fn shipped_fixtures_verify() {
    let dir = TempDir::new().unwrap();
    for name in ["six_element_non_fc.json", "six_element_fc_proof.json", "seven_element_non_fc.json"] {
        let report = dir.path().join(format!("{name}.report"));
        let out = frankl(&["verify", fixture(name).to_str().unwrap(), "-o", report.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert!(report.exists());
    }
}

#[test]
fn structure_queries_on_the_seven_element_family() {
    let (dir, input) = staged("d.fam");
    let path = input.to_str().unwrap();
    let out = frankl(&["structure", "morris", path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&dir.path().join("d.morris.json"));
    assert_eq!(doc["result"]["outcome"], "feasible");
    assert_eq!(doc["system"]["kind"], "morris_z");

    let out = frankl(&["structure", "vaughan", path]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("sum 5566885/5568806 < 1"));

    let out = frankl(&["structure", "smaller-g", path]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&dir.path().join("d.smaller-g.json"))["result"]["g_rows_hold"], true);
}

#[test]
fn morris_empty_exits_one() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("five.fam");
    fs::write(&input, "generators\nground 5\nempty\n1 2 3\n1 4 5\n1 2 3 4\n1 2 3 5\n1 2 4 5\n").unwrap();
    let out = frankl(&["structure", "morris", input.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert_eq!(json(&dir.path().join("five.morris.json"))["result"]["outcome"], "empty");
}

#[test]
fn oracle_verdicts_and_size_limit() {
    let dir = TempDir::new().unwrap();
    let fc = dir.path().join("fc.fam");
    fs::write(&fc, "empty\n1 2\n").unwrap();
    assert_eq!(code(&frankl(&["oracle", fc.to_str().unwrap()])), 0);
    assert_eq!(json(&dir.path().join("fc.oracle.json"))["result"]["verdict"], "fc");

    let non_fc = dir.path().join("nonfc.fam");
    fs::write(&non_fc, "empty\n1 2 3\n").unwrap();
    assert_eq!(code(&frankl(&["oracle", non_fc.to_str().unwrap()])), 1);

    let big = dir.path().join("big.fam");
    fs::write(&big, "1 2 3 4 5\n").unwrap();
    let out = frankl(&["oracle", big.to_str().unwrap()]);
    assert_eq!(code(&out), 64);
    assert!(!dir.path().join("big.oracle.json").exists());
}

#[test]
fn usage_parse_and_io_errors() {
    let dir = TempDir::new().unwrap();
    let not_uc = dir.path().join("not_uc.fam");
    fs::write(&not_uc, "1 2\n3\n").unwrap();
    let out = frankl(&["classify", not_uc.to_str().unwrap()]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("union-closed"));
    assert!(!dir.path().join("not_uc.cert.json").exists());

    let dup = dir.path().join("dup.fam");
    fs::write(&dup, "1 2\n1 2\n").unwrap();
    let out = frankl(&["classify", dup.to_str().unwrap()]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("line 2"));

    assert_eq!(code(&frankl(&["classify", dir.path().join("missing.fam").to_str().unwrap()])), 74);
    assert_eq!(code(&frankl(&["frobnicate"])), 64);
    assert_eq!(code(&frankl(&["certify-weights", not_uc.to_str().unwrap()])), 64);
    assert_eq!(code(&frankl(&["--help"])), 0);

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{\"kind\": \"nothing\"}").unwrap();
    assert_eq!(code(&frankl(&["verify", garbage.to_str().unwrap()])), 64);
}

#[test]
fn node_cap_is_undecided_without_artifact() {
    let (dir, input) = staged("d.fam");
    let out = frankl(&["classify", input.to_str().unwrap(), "--node-limit", "1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(!dir.path().join("d.cert.json").exists());

    let out = Command::new(env!("CARGO_BIN_EXE_frankl"))
        .args(["classify", input.to_str().unwrap()])
        .env("FRANKL_NODE_LIMIT", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn complemented_columns_relabel_matrix_dumps() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("two.fam");
    fs::write(&input, "empty\n1\n1 2\n").unwrap();
    let native = stdout(&frankl(&["oracle", input.to_str().unwrap(), "--matrix"]));
    assert!(native.contains("    0 1 3\n"), "{native}");
    let complemented = stdout(&frankl(&["oracle", input.to_str().unwrap(), "--paper-columns"]));
    assert!(complemented.contains("    0 1 3\n"), "{complemented}");
    assert!(complemented.contains("c_1 1 1 0\n"), "{complemented}");
}

#[test]
fn jobs_flag_is_accepted() {
    let (_dir, input) = staged("s_prime.fam");
    assert_eq!(code(&frankl(&["--jobs", "2", "classify", input.to_str().unwrap(), "--master", "ip"])), 0);
}

#[test]
fn output_flag_redirects_artifact() {
    let (dir, input) = staged("s_prime.fam");
    let target = dir.path().join("elsewhere.json");
    let out = frankl(&["classify", input.to_str().unwrap(), "-o", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(target.exists());
    assert!(!dir.path().join("s_prime.cert.json").exists());
}
