//! End-to-end checks of the command-line interface: file formats, JSON
//! summaries, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn glstrm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glstrm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn write_toy_graph(dir: &Path) -> String {
    let raw = dir.join("toy.txt");
    std::fs::write(&raw, "1 3\n1 4\n1 5\n2 3\n2 4\n2 6\n3 5\n3 6\n").unwrap();
    let out = glstrm(
        &[
            "ingest", "--input", "toy.txt", "--format", "text", "--out", "g",
        ],
        dir,
    );
    let json = stdout_json(&out);
    assert_eq!(json["n"], 6);
    assert_eq!(json["m"], 8);
    "g/graph.glstrm".to_string()
}

#[test]
fn ingest_reports_n_and_m() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_graph(dir.path());
    let map = std::fs::read_to_string(dir.path().join("g/graph.glstrm.map")).unwrap();
    assert_eq!(map.lines().count(), 6);
}

#[test]
fn ingest_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.txt"), "").unwrap();
    let out = glstrm(
        &[
            "ingest",
            "--input",
            "empty.txt",
            "--format",
            "text",
            "--out",
            "g",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["n"], 0);
    assert_eq!(json["m"], 0);
}

#[test]
fn gen_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = glstrm(
            &[
                "gen", "er", "--n", "1000", "--m", "5000", "--seed", "7", "--out", out,
            ],
            dir.path(),
        );
        stdout_json(&o);
    }
    let a = std::fs::read(dir.path().join("a/graph.glstrm")).unwrap();
    let b = std::fs::read(dir.path().join("b/graph.glstrm")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ddorder_exact_scores_zero_eps() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_toy_graph(dir.path());
    let out = glstrm(
        &[
            "ddorder",
            "--input",
            &graph,
            "--orderer",
            "exact",
            "--out",
            "dd",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["max_eps"], 0.0);
    assert!(dir.path().join("dd/order.txt").is_file());
    assert!(dir.path().join("dd/quality.csv").is_file());
    assert!(dir.path().join("dd/quality.json").is_file());
}

#[test]
fn ddorder_es_reports_passes_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    stdout_json(&glstrm(
        &[
            "gen", "er", "--n", "500", "--m", "5000", "--seed", "3", "--out", "g",
        ],
        dir.path(),
    ));
    let out = glstrm(
        &[
            "ddorder",
            "--input",
            "g/graph.glstrm",
            "--orderer",
            "es",
            "--epsilon",
            "0.1",
            "--c",
            "0.1",
            "--seed",
            "11",
            "--out",
            "dd",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    // ceil(T/q)+2 for n=500, eps=0.1: T=128, q=12 -> 13.
    let passes = json["passes_preprocess"].as_u64().unwrap();
    assert!(passes <= 13, "passes {passes}");
    assert_eq!(json["passes_evaluate"], 1);
    assert!(json["max_eps"].as_f64().unwrap() <= 0.1);
}

#[test]
fn estimate_toy_graph_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_toy_graph(dir.path());
    let oracle_out = glstrm(
        &["oracle", "--input", &graph, "--k", "4", "--out", "oracle"],
        dir.path(),
    );
    let oracle_json = stdout_json(&oracle_out);
    assert_eq!(oracle_json["L"], 11);
    assert_eq!(oracle_json["exact"], true);

    let est_out = glstrm(
        &[
            "estimate",
            "--input",
            &graph,
            "--k",
            "4",
            "--samples",
            "50000",
            "--seed",
            "5",
            "--out",
            "est",
        ],
        dir.path(),
    );
    let est_json = stdout_json(&est_out);
    assert_eq!(est_json["T"], 50000);
    assert_eq!(
        est_json["passes_sampling"],
        4 * est_json["batches"].as_u64().unwrap()
    );

    let exact = read_probabilities(&dir.path().join("oracle/exact.csv"));
    let est = read_probabilities(&dir.path().join("est/estimate.csv"));
    let linf = exact
        .iter()
        .zip(&est)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(linf <= 0.05, "L_inf {linf}");
}

fn read_probabilities(path: &Path) -> Vec<f64> {
    let body = std::fs::read_to_string(path).unwrap();
    body.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn estimate_k3_on_triangle_free_graph() {
    // A star has paths but no triangles.
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("star.txt");
    let mut body = String::new();
    for leaf in 1..=9 {
        body.push_str(&format!("0 {leaf}\n"));
    }
    std::fs::write(&raw, body).unwrap();
    stdout_json(&glstrm(
        &[
            "ingest", "--input", "star.txt", "--format", "text", "--out", "g",
        ],
        dir.path(),
    ));
    stdout_json(&glstrm(
        &[
            "estimate",
            "--input",
            "g/graph.glstrm",
            "--k",
            "3",
            "--samples",
            "2000",
            "--seed",
            "2",
            "--out",
            "est",
        ],
        dir.path(),
    ));
    let probs = read_probabilities(&dir.path().join("est/estimate.csv"));
    assert_eq!(probs, vec![1.0, 0.0]); // (path3, triangle)
}

#[test]
fn estimate_refuses_when_no_graphlet_exists() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tri.txt"), "0 1\n1 2\n0 2\n").unwrap();
    stdout_json(&glstrm(
        &[
            "ingest", "--input", "tri.txt", "--format", "text", "--out", "g",
        ],
        dir.path(),
    ));
    let out = glstrm(
        &[
            "estimate",
            "--input",
            "g/graph.glstrm",
            "--k",
            "4",
            "--samples",
            "100",
            "--out",
            "est",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no k-graphlet"));
}

#[test]
fn validation_and_guard_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_toy_graph(dir.path());
    let bad_eps = glstrm(
        &[
            "ddorder",
            "--input",
            &graph,
            "--epsilon",
            "1.5",
            "--out",
            "dd",
        ],
        dir.path(),
    );
    assert_eq!(bad_eps.status.code(), Some(2));

    stdout_json(&glstrm(
        &[
            "gen", "er", "--n", "1500", "--m", "3000", "--seed", "1", "--out", "big",
        ],
        dir.path(),
    ));
    let guard = glstrm(
        &[
            "oracle",
            "--input",
            "big/graph.glstrm",
            "--k",
            "4",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(guard.status.code(), Some(5));

    let budget = glstrm(
        &[
            "ddorder",
            "--input",
            &graph,
            "--orderer",
            "es",
            "--budget-words",
            "2",
            "--seed",
            "4",
            "--out",
            "dd2",
        ],
        dir.path(),
    );
    assert_eq!(budget.status.code(), Some(3));
}

#[test]
fn estimate_is_deterministic_and_emits_intermediates() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_toy_graph(dir.path());
    for out in ["e1", "e2"] {
        let json = stdout_json(&glstrm(
            &[
                "estimate",
                "--input",
                &graph,
                "--k",
                "4",
                "--samples",
                "6000",
                "--budget-words",
                "40000",
                "--seed",
                "21",
                "--emit-intermediate",
                "--log-samples",
                "--out",
                out,
            ],
            dir.path(),
        ));
        assert!(json["batches"].as_u64().unwrap() >= 2);
    }
    let a = std::fs::read(dir.path().join("e1/estimate.csv")).unwrap();
    let b = std::fs::read(dir.path().join("e2/estimate.csv")).unwrap();
    assert_eq!(a, b);
    assert!(dir.path().join("e1/estimate-after-batch-1.csv").is_file());
    assert!(dir.path().join("e1/samples-0.bin").is_file());
}

#[test]
fn estimate_reuses_sidecars_without_new_preprocess_passes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_toy_graph(dir.path());
    let first = stdout_json(&glstrm(
        &[
            "estimate",
            "--input",
            &graph,
            "--k",
            "4",
            "--samples",
            "1000",
            "--seed",
            "6",
            "--out",
            "est",
        ],
        dir.path(),
    ));
    assert!(first["passes_preprocess"].as_u64().unwrap() > 0);
    let second = stdout_json(&glstrm(
        &[
            "estimate",
            "--input",
            &graph,
            "--k",
            "4",
            "--samples",
            "1000",
            "--seed",
            "6",
            "--out",
            "est",
        ],
        dir.path(),
    ));
    assert_eq!(second["passes_preprocess"], 0);
}

#[test]
fn heuristic_orderer_runs_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    stdout_json(&glstrm(
        &[
            "gen", "er", "--n", "300", "--m", "2000", "--seed", "9", "--out", "g",
        ],
        dir.path(),
    ));
    let out = glstrm(
        &[
            "ddorder",
            "--input",
            "g/graph.glstrm",
            "--orderer",
            "es",
            "--heuristic",
            "--budget-words",
            "100000",
            "--seed",
            "12",
            "--out",
            "dd",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert!(json["max_eps"].as_f64().unwrap() <= 0.1 + 1e-12);
}
