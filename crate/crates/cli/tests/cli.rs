use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn ddgl2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddgl2"))
        .args(args)
        .env_remove("DDGL2_CORPUS")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn with_corpus(args: &[&str], dir: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let d = dir.to_str().unwrap();
    all.extend(["--corpus", d]);
    ddgl2(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn table_rows(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).map(str::to_string).collect()
}

#[test]
fn verify_single_case() {
    let o = with_corpus(&["verify", "--case", "2.2"], &corpus_dir());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("C12*C21 = -m*e(2,3)"), "{text}");
    assert!(text.starts_with("seed 20240917, 3 draws, errata off"));
}

#[test]
fn unknown_case_is_a_usage_error() {
    let o = with_corpus(&["verify", "--case", "9.9"], &corpus_dir());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("9.9"));
    assert_eq!(ddgl2(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(with_corpus(&["verify", "--branch", "1"], &corpus_dir()).status.code(), Some(2));
    assert_eq!(with_corpus(&["verify", "--case", "2.2", "--branch", "2"], &corpus_dir()).status.code(), Some(2));
    assert_eq!(with_corpus(&["verify", "--family", "8"], &corpus_dir()).status.code(), Some(2));
    assert_eq!(ddgl2(&["verify", "--draws", "0"]).status.code(), Some(2));
}

#[test]
fn missing_corpus_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(with_corpus(&["verify"], tmp.path()).status.code(), Some(2));
}

#[test]
fn full_json_run_has_eighty_records() {
    let o = with_corpus(&["verify", "--all", "--format", "json", "--errata", "on"], &corpus_dir());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cases"].as_array().unwrap().len(), 80);
    assert_eq!(v["seed"], 20240917);
    assert_eq!(v["summary"]["unexplained"], 0);
}

#[test]
fn tables() {
    let o = with_corpus(&["table", "--family", "4"], &corpus_dir());
    let rows = table_rows(&o);
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.starts_with("4.")));
    let o = with_corpus(&["table", "--family", "5"], &corpus_dir());
    assert_eq!(table_rows(&o).len(), 4);
    let o = with_corpus(&["table"], &corpus_dir());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(table_rows(&o).len(), 80);
}

#[test]
fn uncovered_discrepancy_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    for f in 1..=7 {
        let sub = tmp.path().join(format!("family-{f}"));
        std::fs::create_dir_all(&sub).unwrap();
        let src = corpus_dir().join(format!("family-{f}/cases.json"));
        let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
        if f == 6 {
            doc["cases"][0].as_object_mut().unwrap().remove("errata");
        }
        std::fs::write(sub.join("cases.json"), serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    }
    let o = with_corpus(&["verify", "--case", "6.1"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("unexplained"));
    let o = with_corpus(&["verify", "--case", "6.2"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn corpus_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_ddgl2"))
        .args(["table", "--family", "5"])
        .env("DDGL2_CORPUS", corpus_dir())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(table_rows(&o).len(), 4);
    let o = Command::new(env!("CARGO_BIN_EXE_ddgl2"))
        .args(["table"])
        .env("DDGL2_CORPUS", "/nonexistent/corpus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_is_deterministic() {
    let args = ["verify", "--family", "7", "--draws", "2", "--seed", "99", "--format", "json"];
    let a = with_corpus(&args, &corpus_dir());
    let mut serial = args.to_vec();
    serial.extend(["--jobs", "1"]);
    let b = with_corpus(&serial, &corpus_dir());
    assert_eq!(a.stdout, b.stdout);
    let c =
        with_corpus(&["verify", "--family", "7", "--draws", "2", "--seed", "100", "--format", "json"], &corpus_dir());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn output_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("report.json");
    let o = with_corpus(&["verify", "--case", "1.8", "--format", "json", "-o", path.to_str().unwrap()], &corpus_dir());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["cases"][0]["case"], "1.8");
}

#[test]
fn clifford_check() {
    let o = ddgl2(&["clifford-check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("rank 16 / 16"), "{text}");
    assert!(text.contains("clifford-check: pass"));

    let j = ddgl2(&["clifford-check", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["rank"], 16);
    assert_eq!(v["products"].as_array().unwrap().len(), 16);

    let bad = ddgl2(&["clifford-check", "--corrupt", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("clifford-check: FAIL"));
    let badj = ddgl2(&["clifford-check", "--corrupt", "1", "--format", "json"]);
    assert_eq!(badj.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&badj.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn explain_and_fmt() {
    let o = with_corpus(&["explain", "--case", "7.13", "--branch", "2"], &corpus_dir());
    assert_eq!(o.status.code(), Some(0));
    assert!(!o.stdout.is_empty());
    let o = with_corpus(&["fmt", "--check"], &corpus_dir());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
