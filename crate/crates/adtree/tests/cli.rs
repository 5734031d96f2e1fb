//! Black-box tests spawning the compiled binary on fixture files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_adtree")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Writes the six-record worked example plus its value-map sidecar, which
/// declares the middle attribute's full four-value range even though one
/// value never occurs.
fn fixture() -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("example.csv");
    let maps = dir.path().join("example.maps.json");
    std::fs::write(&csv, "a1,a2,a3\n1,1,1\n2,3,1\n2,4,2\n1,3,1\n2,3,1\n1,3,1\n").unwrap();
    std::fs::write(&maps, r#"[["1","2"],["1","2","3","4"],["1","2"]]"#).unwrap();
    (dir, csv, maps)
}

#[test]
fn count_prints_the_golden_value() {
    let (dir, _, _) = fixture();
    let out = run_in(
        dir.path(),
        &["count", "example.csv", "--maps", "example.maps.json", "--q", "a2=3,a3=1"],
    );
    assert_eq!(stdout(&out), "4\n");
}

#[test]
fn count_accepts_positional_query_grammar() {
    let (dir, _, _) = fixture();
    let out = run_in(
        dir.path(),
        &["count", "example.csv", "--maps", "example.maps.json", "--q", "@1=2"],
    );
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn dense_table_prints_tsv_rows() {
    let (dir, _, _) = fixture();
    let out = run_in(
        dir.path(),
        &[
            "contab",
            "example.csv",
            "--maps",
            "example.maps.json",
            "--attrs",
            "a1,a3",
            "--dense",
        ],
    );
    assert_eq!(stdout(&out), "1\t1\t3\n1\t2\t0\n2\t1\t2\n2\t2\t1\n");
}

#[test]
fn bounds_report_contains_the_known_value() {
    let out = run_in(Path::new("."), &["bounds", "--m", "40", "--r", "15"]);
    let text = stdout(&out);
    assert!(text.contains("10701"), "output: {text}");
}

#[test]
fn saved_trees_answer_identically_to_fresh_builds() {
    let (dir, _, _) = fixture();
    let build = run_in(
        dir.path(),
        &[
            "build",
            "example.csv",
            "--maps",
            "example.maps.json",
            "--rmin",
            "4",
            "--save",
            "example.adt",
        ],
    );
    stdout(&build);

    for args in [
        vec!["count", "--q", "a2=3,a3=1"],
        vec!["contab", "--attrs", "a1,a3", "--dense"],
        vec!["contab", "--attrs", "a1,a3", "--cond", "a2=3"],
    ] {
        let mut fresh = vec![args[0], "example.csv", "--maps", "example.maps.json", "--rmin", "4"];
        fresh.extend(&args[1..]);
        let mut loaded = vec![
            args[0],
            "example.adt",
            "--data",
            "example.csv",
            "--maps",
            "example.maps.json",
        ];
        loaded.extend(&args[1..]);
        let a = run_in(dir.path(), &fresh);
        let b = run_in(dir.path(), &loaded);
        assert_eq!(stdout(&a), stdout(&b), "args: {args:?}");
    }
}

#[test]
fn json_output_is_parseable() {
    let (dir, _, _) = fixture();
    let out = run_in(
        dir.path(),
        &[
            "--json",
            "count",
            "example.csv",
            "--maps",
            "example.maps.json",
            "--q",
            "a1=1",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["count"], 3);

    let out = run_in(
        dir.path(),
        &[
            "--json",
            "build",
            "example.csv",
            "--maps",
            "example.maps.json",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["ad_nodes"], 7);
    assert_eq!(v["vary_nodes"], 8);
}

#[test]
fn synth_is_reproducible_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = run_in(
            dir.path(),
            &["synth", "--records", "300", "--seed", "12", "--out", name],
        );
        stdout(&out);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    let out = run_in(dir.path(), &["count", "a.csv", "--q", "@1=1"]);
    let n: u64 = stdout(&out).trim().parse().unwrap();
    assert!(n > 0 && n <= 300);
}

#[test]
fn usage_errors_exit_two_and_data_errors_exit_one() {
    let (dir, _, _) = fixture();
    let usage = run_in(dir.path(), &["count", "example.csv", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));

    let data = run_in(
        dir.path(),
        &["count", "example.csv", "--maps", "example.maps.json", "--q", "nope=1"],
    );
    assert_eq!(data.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&data.stderr).is_empty());

    let missing = run_in(dir.path(), &["count", "absent.csv", "--q", "a1=1"]);
    assert_eq!(missing.status.code(), Some(1));
}
