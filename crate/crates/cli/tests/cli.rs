use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn k3frob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3frob")).args(args).output().unwrap()
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/corpus")
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ns_and_zeta_and_chamber() {
    let o = k3frob(&["ns", &corpus("valid_small")]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("rank: 1\n"));
    let o = k3frob(&["zeta", &corpus("trace_minus_30")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("N_1 = -25") && text.contains("question (N_1 < 0): true"));
    let o = k3frob(&["chamber", &corpus("valid_small")]);
    assert!(stdout(&o).contains("preserves the chamber"));
    assert_eq!(k3frob(&["ns", &corpus("malformed_json")]).status.code(), Some(2));
}

#[test]
fn batch_verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("reports");
    let o = k3frob(&[
        "verify",
        Path::new(&corpus("valid_small")).parent().unwrap().to_str().unwrap(),
        "--report",
        out.to_str().unwrap(),
    ]);
    // the corpus contains malformed documents, so the worst code is 2
    assert_eq!(o.status.code(), Some(2));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "jordan.report.json",
            "k3_scalar.report.json",
            "trace_minus_30.report.json",
            "valid_small.report.json"
        ]
    );
    let single = k3frob(&["verify", &corpus("valid_small"), "--report", "-"]);
    let report = fs::read_to_string(out.join("valid_small.report.json")).unwrap();
    assert!(stdout(&single).ends_with(&report));
}

#[test]
fn search_usage_errors_and_empty_question() {
    assert_eq!(
        k3frob(&["search-weil", "--q", "2", "--degree", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        k3frob(&["search-weil", "--q", "6", "--degree", "4"]).status.code(),
        Some(2)
    );
    let o = k3frob(&["search-weil", "--q", "13", "--degree", "6", "--question"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let o = k3frob(&["search-weil", "--q", "2", "--degree", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
    // output does not depend on the worker count
    let a = k3frob(&["search-weil", "--q", "3", "--degree", "4", "--workers", "1"]);
    let b = k3frob(&["search-weil", "--q", "3", "--degree", "4", "--workers", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn checkpoint_requires_matching_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    let cp = dir.path().join("cp.json");
    let (o, c) = (out.to_str().unwrap(), cp.to_str().unwrap());
    let first = k3frob(&[
        "search-weil",
        "--q",
        "3",
        "--degree",
        "4",
        "--chunk",
        "1",
        "--stop-after-chunks",
        "1",
        "--out",
        o,
        "--checkpoint",
        c,
    ]);
    assert!(first.status.success() && cp.exists());
    let other = k3frob(&[
        "search-weil",
        "--q",
        "3",
        "--degree",
        "4",
        "--audit",
        "--out",
        o,
        "--checkpoint",
        c,
    ]);
    assert_eq!(other.status.code(), Some(3));
    fs::write(&cp, "{").unwrap();
    let broken = k3frob(&[
        "search-weil",
        "--q",
        "3",
        "--degree",
        "4",
        "--out",
        o,
        "--checkpoint",
        c,
    ]);
    assert_eq!(broken.status.code(), Some(2));
}
