use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn elli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elli"))
        .args(args)
        .current_dir(dir)
        .env_remove("ELLISPEC_THREADS")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn delta_zero_pipeline_recovers_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let synth = ok(&elli(d, &["synth", "--sizes", "100x10", "--delta", "0", "--seed", "1"]));
    assert_eq!(synth[0]["seed"], 1);
    ok(&elli(d, &["cluster", "--algo", "elli", "--k", "10"]));
    let eval = ok(&elli(d, &["eval", "--truth", "truth.txt"]));
    assert_eq!(eval[0]["ac"].as_f64(), Some(1.0));
    assert_eq!(eval[0]["mcc"].as_f64(), Some(0.0));
}

#[test]
fn ksc_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&elli(d, &["synth", "--sizes", "30x4", "--delta", "0.5", "--seed", "3"]));
    let args = ["--no-timings", "cluster", "--algo", "ksc", "--trials", "2", "--seed", "9", "--k", "4"];
    let a = elli(d, &args);
    let la = std::fs::read(d.join("labels.txt")).unwrap();
    let b = elli(d, &args);
    let lb = std::fs::read(d.join("labels.txt")).unwrap();
    assert_eq!(ok(&a).len(), 2);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(la, lb);

    // with timings on, everything but elapsed_s still matches
    let strip = |o: &Output| {
        ok(o).into_iter()
            .map(|mut v| {
                v.as_object_mut().unwrap().remove("elapsed_s").unwrap();
                v
            })
            .collect::<Vec<_>>()
    };
    let timed = &args[1..];
    assert_eq!(strip(&elli(d, timed)), strip(&elli(d, timed)));
}

#[test]
fn ksc_out_holds_the_lowest_cost_trial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&elli(d, &["synth", "--sizes", "20x5", "--delta", "1.2", "--seed", "4"]));
    let recs = ok(&elli(d, &["cluster", "--algo", "ksc", "--trials", "6", "--k", "5", "--seed", "2"]));
    let best = recs
        .iter()
        .min_by(|a, b| a["cost"].as_f64().unwrap().total_cmp(&b["cost"].as_f64().unwrap()))
        .unwrap();
    assert_eq!(best["best"], true);
    let trials: Vec<u64> = recs.iter().map(|r| r["trial"].as_u64().unwrap()).collect();
    assert_eq!(trials, (0..6).collect::<Vec<_>>());
}

#[test]
fn missing_k_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = elli(dir.path(), &["cluster", "--algo", "elli"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(elli(d, &["cluster", "--k", "2", "--graph", "missing.mtx"]).status.code(), Some(3));
    std::fs::write(
        d.join("iso.mtx"),
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 1\n2 1 1.0\n",
    )
    .unwrap();
    assert_eq!(elli(d, &["cluster", "--k", "2", "--graph", "iso.mtx"]).status.code(), Some(5));
    ok(&elli(d, &["synth", "--sizes", "5x2", "--delta", "1", "--seed", "0"]));
    assert_eq!(elli(d, &["cluster", "--k", "10"]).status.code(), Some(2));
    assert_eq!(elli(d, &["synth", "--suite", "nope", "--delta", "0"]).status.code(), Some(2));
}

#[test]
fn knn_graph_and_embedding_dump() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("a,b,c\n");
    for i in 0..12 {
        let row = match i % 3 {
            0 => [5.0, 1.0, 0.1],
            1 => [0.1, 5.0, 1.0],
            _ => [1.0, 0.1, 5.0],
        };
        csv += &format!("{},{},{}\n", row[0] + i as f64 * 0.01, row[1], row[2]);
    }
    std::fs::write(d.join("v.csv"), csv).unwrap();
    let rec = ok(&elli(d, &["knn-graph", "--input", "v.csv", "--p", "3"]));
    assert_eq!(rec[0]["n"], 12);
    ok(&elli(d, &["cluster", "--k", "3", "--dump-embedding", "emb.txt"]));
    let emb = std::fs::read_to_string(d.join("emb.txt")).unwrap();
    let lines: Vec<&str> = emb.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0].split_whitespace().count(), 4);
    assert_eq!(lines[1].split_whitespace().count(), 12);
}

#[test]
fn sweep_writes_json_lines_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let recs = ok(&elli(
        d,
        &["--threads", "2", "sweep", "--sizes", "15x3", "--delta-min", "0.2", "--delta-max", "0.4", "--trials", "2", "--seed", "5", "--csv", "s.csv"],
    ));
    // three points, one ELLI and two KSC records each, in delta order
    assert_eq!(recs.len(), 9);
    let deltas: Vec<f64> = recs.iter().map(|r| r["delta"].as_f64().unwrap()).collect();
    assert!(deltas.windows(2).all(|w| w[0] <= w[1]));
    assert!(recs.iter().all(|r| r["seed"] == 5));
    let csv = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
