use std::collections::BTreeMap;

use topoal::harness::{csv_text, emit_results, read_csv, run_experiment, summarize, ExperimentConfig};

fn config(extra: &[&str]) -> ExperimentConfig {
    let text = "dataset.kind = blobs\ndataset.points_per_cluster = 25\ndataset.classes = 4\n\
                graph.k = 8\ngraph.metric = euclidean\nmultiscale.fine_k = 5\n\
                coreset.method = cc\ncoreset.budget = 4\nal.budget = 6\ntrials = 3\nseed = 7\n";
    let flags: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::from_text(text, &flags).unwrap()
}

#[test]
fn untimed_runs_write_identical_bytes() {
    let cfg = config(&[
        "--classifier",
        "laplace,pwll,hypergraph,rewired,random-rewired",
        "--output.timing",
        "false",
    ]);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    emit_results(&run_experiment(&cfg).unwrap(), a.path()).unwrap();
    emit_results(&run_experiment(&cfg).unwrap(), b.path()).unwrap();
    for name in ["laplace", "pwll", "hypergraph", "rewired", "random-rewired"] {
        let x = std::fs::read(a.path().join(format!("{name}.csv"))).unwrap();
        let y = std::fs::read(b.path().join(format!("{name}.csv"))).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}.csv differs");
    }
    assert_eq!(
        std::fs::read(a.path().join("summary.json")).unwrap(),
        std::fs::read(b.path().join("summary.json")).unwrap()
    );
}

#[test]
fn summary_matches_an_independent_aggregation() {
    let out = run_experiment(&config(&["--trials", "4"])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = emit_results(&out, dir.path()).unwrap();
    let records = read_csv(dir.path().join("laplace.csv")).unwrap();
    assert_eq!(records.len(), out.methods[0].records.len());

    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &records {
        assert!((0.0..=1.0).contains(&r.accuracy));
        groups.entry(r.labels).or_default().push(r.accuracy);
    }
    let curve = &summary.methods[0].curve;
    assert_eq!(curve.len(), groups.len());
    for (stat, (labels, acc)) in curve.iter().zip(&groups) {
        // two-pass mean and population variance in a different order
        let n = acc.len() as f64;
        let mean = acc.iter().rev().fold(0.0, |s, a| s + a) / n;
        let var = acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        assert_eq!(stat.labels, *labels);
        assert_eq!(stat.count, acc.len());
        assert!((stat.mean - mean).abs() <= 1e-12);
        assert!((stat.std - var.sqrt()).abs() <= 1e-9);
    }
    assert_eq!(summarize(&records), *curve);
    assert_eq!(summary.methods[0].completed, 4);
}

#[test]
fn csv_round_trips() {
    let out = run_experiment(&config(&["--classifier", "pwll"])).unwrap();
    let recs = &out.methods[0].records;
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.csv");
    std::fs::write(&p, csv_text(recs)).unwrap();
    assert_eq!(&read_csv(&p).unwrap(), recs);
}
