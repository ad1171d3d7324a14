use std::fs;
use std::process::{Command, Output};

fn topoal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoal"))
        .args(args)
        .env("TOPOAL_WORKERS", "1")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    assert_eq!(code(&topoal(&["--help"])), 0);
    assert_eq!(code(&topoal(&["frobnicate"])), 1);
    assert_eq!(code(&topoal(&["bench", "no-such-preset", "--out", "/tmp/unused"])), 1);
    let o = topoal(&["bench", "coreset-bench", "--out", "/tmp/unused", "--graph.kk", "3"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("graph.kk"));
    let o = Command::new(env!("CARGO_BIN_EXE_topoal"))
        .args(["report", "/tmp"])
        .env("TOPOAL_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn small_bench_writes_results_and_report_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = topoal(&[
        "bench",
        "coreset-bench",
        "--out",
        out.to_str().unwrap(),
        "--dataset.points_per_cluster",
        "20",
        "--graph.k=6",
        "--coreset.budget",
        "5",
        "--al.budget",
        "4",
        "--trials",
        "2",
        "--output.timing",
        "false",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("laplace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    assert!(csv.starts_with("trial,iteration,labels,accuracy"));
    assert!(out.join("summary.json").exists());

    let r = topoal(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stdout).contains("laplace: 2 trials"));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&topoal(&["report", empty.to_str().unwrap()])), 1);
}

#[test]
fn graph_build_then_curvature_query() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    // two tight triples far apart
    fs::write(&pts, "6 2\n0 0\n0 1\n1 0\n50 50\n50 51\n51 50\n").unwrap();
    let g = dir.path().join("g.txt");
    let o = topoal(&[
        "graph",
        "build",
        "--points",
        pts.to_str().unwrap(),
        "--k",
        "2",
        "--metric",
        "euclidean",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = topoal(&["bfc", "pair", "--graph", g.to_str().unwrap(), "0", "1"]);
    assert_eq!(code(&o), 0);
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 1.5).abs() < 1e-12);

    // a node paired with itself is a runtime error, not a usage error
    assert_eq!(code(&topoal(&["bfc", "pair", "--graph", g.to_str().unwrap(), "0", "0"])), 2);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 2\n0 0\n").unwrap();
    let o = topoal(&["graph", "build", "--points", bad.to_str().unwrap(), "--out", g.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn coreset_run_prints_one_line_per_trial() {
    let o = topoal(&[
        "coreset",
        "run",
        "--dataset.points_per_cluster",
        "15",
        "--graph.k",
        "5",
        "--graph.metric",
        "euclidean",
        "--coreset.budget",
        "6",
        "--trials",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.starts_with('{') && l.contains("\"nodes\"")));
}
