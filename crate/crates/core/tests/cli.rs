use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldp-fpminer"))
        .args(args)
        .current_dir(dir)
        .env_remove("LDP_FPMINER_OUTPUT")
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cli(d, &["gen-data", "--n", "3000", "--d", "25", "--seed", "4", "--out", "data.txt"]));
    assert_eq!(fs::read_to_string(d.join("data.txt")).unwrap().lines().count(), 3000);

    let truth = ok(cli(d, &["ground-truth", "--data", "data.txt", "--k", "12"]));
    assert_eq!(truth.lines().count(), 12);
    assert!(truth.lines().all(|l| l.contains(" #SUP: ")));
    let pairs = ok(cli(d, &["ground-truth", "--data", "data.txt", "--k", "4", "--min-len", "2"]));
    assert!(pairs.lines().all(|l| l.split(" #SUP:").next().unwrap().split(' ').count() >= 2));

    fs::write(
        d.join("exp.json"),
        r#"{"dataset": {"file": {"path": "data.txt"}}, "ks": [5], "epsilons": [2.0, 4.0],
            "trials": 2, "output_dir": "results", "master_seed": 5}"#,
    )
    .unwrap();
    ok(cli(d, &["run", "--config", "exp.json"]));
    let summary = fs::read_to_string(d.join("results/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert_eq!(fs::read_dir(d.join("results/trials")).unwrap().count(), 8);

    let rescored = ok(cli(d, &["metrics", "--results", "results", "--data", "data.txt"]));
    assert_eq!(rescored.lines().count(), 8);
    ok(cli(d, &["report", "--results", "results", "--out", "again.csv"]));
    assert_eq!(fs::read_to_string(d.join("again.csv")).unwrap(), summary);
}

#[test]
fn output_root_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(cli(d, &["gen-data", "--n", "500", "--d", "10", "--out", "data.txt"]));
    fs::write(
        d.join("exp.json"),
        r#"{"dataset": {"file": {"path": "data.txt"}}, "miners": ["svsm"], "ks": [3], "epsilons": [1.0],
            "trials": 1, "output_dir": "configured"}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ldp-fpminer"))
        .args(["run", "--config", "exp.json"])
        .current_dir(d)
        .env("LDP_FPMINER_OUTPUT", d.join("elsewhere"))
        .output()
        .unwrap();
    ok(out);
    assert!(d.join("elsewhere/summary.csv").exists());
    assert!(!d.join("configured").exists());
}

#[test]
fn bad_invocations_fail_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["run"], &["ground-truth", "--k", "3"], &["run", "--config", "missing.json"]] {
        let out = cli(dir.path(), args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
