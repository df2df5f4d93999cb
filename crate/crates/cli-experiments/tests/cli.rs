//! End-to-end runs of the `haarweight` binary: exit codes, outputs, golden tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(experiment: &str, config: &str, out: &Path) -> Output {
    let dir = out.parent().unwrap();
    let cfg = dir.join(format!("{experiment}-{}.json", out.file_name().unwrap().to_string_lossy()));
    fs::write(&cfg, config).unwrap();
    run_file(experiment, &cfg, out)
}

fn run_file(experiment: &str, cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarweight")).arg(experiment).arg("--config").arg(cfg).arg("--out").arg(out).output().expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<(String, String)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn passing_run_exits_zero_and_writes_documented_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = run("carleson", r#"{"id": "c", "seed": 3}"#, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("c.report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "carleson");
    assert!(report["assertions"].as_array().unwrap().iter().all(|a| a["passed"] == true));
    assert!(!out.join("c.diagnostics.json").exists());

    let csvs = csv_files(&out);
    assert!(!csvs.is_empty());
    for (name, text) in csvs {
        let schema_path = out.join(name.replace(".csv", ".schema.json"));
        let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(&schema_path).unwrap()).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        let documented: Vec<String> = schema["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
        assert_eq!(header, documented, "{name}");
    }
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    for (i, cfg) in [
        r#"{"id": "x", "unknown_key": 1}"#,
        r#"{"id": "x", "kind": "no-such-kind"}"#,
        r#"{"id": "x", "p": 0.5}"#,
        r#"not json"#,
    ]
    .iter()
    .enumerate()
    {
        let o = run("counterexample", cfg, &tmp.path().join(format!("o{i}")));
        assert_eq!(o.status.code(), Some(1), "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run_file("apchar", &tmp.path().join("missing.json"), &tmp.path().join("m"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_assertion_exits_two_with_diagnostics() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = r#"{"id": "s", "kind": "sparse", "grid": {"d": 1, "L": 9}, "alphas": [0.1, 0.9], "samples": 1}"#;
    let o = run("sweep", cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("FAIL ")), "{stdout}");
    let stderr = String::from_utf8(o.stderr).unwrap();
    let diag: serde_json::Value = serde_json::from_str(&stderr[stderr.find('{').unwrap()..]).unwrap();
    assert!(!diag["failed"].as_array().unwrap().is_empty());
    assert!(out.join("s.diagnostics.json").exists());
}

#[test]
fn reruns_reproduce_every_csv_byte_for_byte() {
    let tmp = TempDir::new().unwrap();
    for (exp, cfg) in [
        ("maximal", r#"{"id": "m", "seed": 11, "samples": 3, "grid": {"d": 1, "L": 7}}"#),
        ("equivalence", r#"{"id": "e", "seed": 5, "samples": 12}"#),
        ("sparse", r#"{"id": "p", "seed": 2, "samples": 2}"#),
    ] {
        let a = tmp.path().join(format!("{exp}-a"));
        let b = tmp.path().join(format!("{exp}-b"));
        assert_eq!(run(exp, cfg, &a).status.code(), Some(0));
        assert_eq!(run(exp, cfg, &b).status.code(), Some(0));
        assert_eq!(csv_files(&a), csv_files(&b), "{exp}");
        if exp == "sparse" {
            assert_eq!(fs::read(a.join("p.family.json")).unwrap(), fs::read(b.join("p.family.json")).unwrap());
        }
    }
}

#[test]
fn counterexample_tables_match_golden_files() {
    let tmp = TempDir::new().unwrap();
    for kind in ["haar-multiplier", "paraproduct"] {
        for alpha in ["0.3", "0.5"] {
            let stem = format!("{kind}-{alpha}");
            let out = tmp.path().join(&stem);
            let o = run_file("counterexample", &golden_dir().join(format!("{stem}.json")), &out);
            assert_eq!(o.status.code(), Some(0), "{stem}: {}", String::from_utf8_lossy(&o.stdout));
            let mut tables = vec![(format!("golden.{kind}.csv"), format!("{stem}.csv"))];
            if kind == "haar-multiplier" {
                tables.push((format!("golden.{kind}-dense.csv"), format!("{stem}-dense.csv")));
            }
            for (produced, expected) in tables {
                let got = fs::read_to_string(out.join(&produced)).unwrap();
                let want = fs::read_to_string(golden_dir().join(&expected)).unwrap();
                assert_eq!(got, want, "{expected} differs");
            }
        }
    }
}
