use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qindex"))
        .args(args)
        .env_remove("QINDEX_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn build_examples() {
    let o = qindex(&["build", "b1", "--n", "4", "--p", "2", "--q", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["arcs"].as_array().unwrap().len(), 6);
    assert_eq!(v["n"].as_u64(), Some(4));

    let o = qindex(&["build", "kpq", "--n", "5", "--p", "3", "--q", "2"]);
    assert_eq!(json(&o)["arcs"].as_array().unwrap().len(), 12);

    let o = qindex(&["build", "b1", "--n", "5", "--p", "2", "--q", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("odd"), "{}", stderr(&o));

    let o = qindex(&["build", "b5", "--n", "6", "--p", "2", "--q", "2", "--format", "dot"]);
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph {"));
    assert!(dot.contains("5 -> 6;") && dot.contains("6 -> 3;"));
}

#[test]
fn qindex_examples_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qindex(&["qindex", "kpq", "--n", "5", "--p", "3", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["q"].as_f64().unwrap() - 5.0).abs() <= 1e-10);
    let enc = v["enclosure"].as_array().unwrap();
    assert!(enc[0].as_f64().unwrap() <= 5.0 && 5.0 <= enc[1].as_f64().unwrap());

    let cycle = write(dir.path(), "cycle.json", r#"{"n": 5, "arcs": [[1,2],[2,3],[3,4],[4,5],[5,1]]}"#);
    let v = json(&qindex(&["qindex", "--input", &cycle]));
    assert!((v["q"].as_f64().unwrap() - 2.0).abs() <= 1e-10);

    let split = write(dir.path(), "split.json", r#"{"n": 4, "arcs": [[1,2],[2,1],[3,4],[4,3]]}"#);
    assert_eq!(qindex(&["qindex", "--input", &split]).status.code(), Some(2));

    let broken = write(dir.path(), "broken.json", r#"{"n": 2, "arcs": [[1,1]]}"#);
    assert_eq!(qindex(&["qindex", "--input", &broken]).status.code(), Some(2));

    let o = qindex(&["qindex", "b1", "--n", "6", "--p", "2", "--q", "1", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn charpoly_root_and_value() {
    let o = qindex(&["charpoly", "--kind", "f", "--n", "4", "--p", "2", "--q", "1", "--eval", "3"]);
    assert_eq!(json(&o)["value"].as_f64(), Some(-3.0));

    let root = json(&qindex(&["charpoly", "f", "--n", "4", "--p", "2", "--q", "1", "--root"]))["root"]
        .as_f64()
        .unwrap();
    let q = json(&qindex(&["qindex", "b1", "--n", "4", "--p", "2", "--q", "1"]))["q"].as_f64().unwrap();
    assert!((root - q).abs() <= 1e-7);

    assert_eq!(qindex(&["charpoly", "h", "--n", "4", "--p", "2", "--q", "1"]).status.code(), Some(2));
}

#[test]
fn verify_single_points() {
    let o = qindex(&["verify", "thm1", "--n", "4", "--p", "2", "--q", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["claim"], "thm1");

    let o = qindex(&["verify", "perron", "--family", "b1", "--n", "6", "--p", "2", "--q", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let names: Vec<&str> = v["comparisons"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for row in ["row v_1", "row v_p", "row v_{p+1}"] {
        assert!(names.contains(&row), "{names:?}");
    }
    assert!(names.iter().any(|n| n.starts_with("path:")));
    assert!(names.iter().any(|n| n.starts_with("row v_p solved")));

    // Degenerate side: v_p = v_1, the rotation does nothing.
    let o = qindex(&["verify", "thm2", "--n", "3", "--p", "1", "--q", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "fail");

    assert_eq!(qindex(&["verify", "thm9"]).status.code(), Some(2));
    assert_eq!(qindex(&["verify", "thm1", "--n", "4"]).status.code(), Some(2));
    assert_eq!(qindex(&["verify", "thm1", "--n", "6", "--p", "2", "--q", "2"]).status.code(), Some(2));
}

#[test]
fn verify_grid_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("out/certs.jsonl");
    let csv = dir.path().join("out/summary.csv");
    let o = qindex(&[
        "verify",
        "thm4",
        "--grid",
        "nmax=9,pmax=3,qmax=3",
        "--jsonl",
        jsonl.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let lines: Vec<String> = std::fs::read_to_string(&jsonl).unwrap().lines().map(String::from).collect();
    let table = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "claim,n,p,q,verdict,margin");
    assert_eq!(rows.len(), lines.len() + 1);
    assert!(rows[1].starts_with("thm4,4,1,1,pass,"));
    for line in &lines {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["verdict"], "pass");
    }
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "run.conf", "# test\ntol = 1e-8\nband_multiplier = 20\n");
    let args = ["verify", "thm1", "--n", "4", "--p", "2", "--q", "1", "--config", &file];

    let v = json(&qindex(&args));
    assert_eq!(v["tolerance"].as_f64(), Some(1e-8));
    assert!((v["strict_margin"].as_f64().unwrap() - 2e-7).abs() < 1e-20);

    let mut with_flag = args.to_vec();
    with_flag.extend(["--tol", "1e-9"]);
    let v = json(&qindex(&with_flag));
    assert_eq!(v["tolerance"].as_f64(), Some(1e-9));
    assert!((v["strict_margin"].as_f64().unwrap() - 2e-8).abs() < 1e-20);

    let v = json(&qindex(&["verify", "thm1", "--n", "4", "--p", "2", "--q", "1"]));
    assert_eq!(v["tolerance"].as_f64(), Some(1e-10));

    let bad = write(dir.path(), "bad.conf", "tol = -1\n");
    assert_eq!(
        qindex(&["verify", "thm1", "--n", "4", "--p", "2", "--q", "1", "--config", &bad]).status.code(),
        Some(2)
    );
    let typo = write(dir.path(), "typo.conf", "tolerance = 1e-9\n");
    assert_eq!(
        qindex(&["qindex", "kpq", "--n", "3", "--p", "2", "--q", "1", "--config", &typo]).status.code(),
        Some(2)
    );
    assert_eq!(
        qindex(&["qindex", "kpq", "--n", "3", "--p", "2", "--q", "1", "--band-multiplier", "0.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn enumerate_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = qindex(&["enumerate", "--n", "5", "--p", "2", "--q", "1", "--workers", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_qindex"))
        .args(["enumerate", "--n", "5", "--p", "2", "--q", "1"])
        .env("QINDEX_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(o.stdout, first);

    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["predicted"]["family"], "b5");
    assert_eq!(v["minimizer_classes"].as_u64(), Some(1));
    assert!(v.get("runtime_seconds").is_none());

    let v = json(&qindex(&["enumerate", "--n", "4", "--p", "2", "--q", "1", "--timed"]));
    assert!(v["runtime_seconds"].as_f64().is_some());

    assert_eq!(qindex(&["enumerate", "--n", "8", "--p", "2", "--q", "1"]).status.code(), Some(2));
    assert_eq!(qindex(&["enumerate", "--n", "4", "--p", "1", "--q", "2"]).status.code(), Some(2));
}

#[test]
fn export_dot_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "g.json", r#"{"n": 3, "arcs": [[1,2],[2,3],[3,1]]}"#);
    let out = dir.path().join("g.dot");
    let o = qindex(&["export-dot", "--input", &file, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(out).unwrap();
    assert!(dot.contains("1 -> 2;") && dot.contains("3 -> 1;"));
}
