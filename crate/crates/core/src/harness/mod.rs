//! Experiment configuration, trial orchestration and result files.

mod config;
mod output;

use log::{error, info};
use rayon::prelude::*;

pub use config::{
    preset_text, ClassifierKind, ConfigMap, CoresetMethod, CoresetSpec, DatasetKind, DatasetSpec, ExperimentConfig,
    MultiscaleSpec, ScheduleKind, PRESETS,
};
pub use output::{
    csv_text, emit_results, read_csv, report, summarize, summary_of, write_csv, LabelStat, MethodSummary, Summary, CSV_HEADER,
};

use crate::active::{al_loop, Classifier, RewireFocus, TauSchedule};
use crate::coreset::{curvature_coreset, dac_coreset, per_class_coreset, random_coreset, CoresetResult};
use crate::data::{load_embeddings, make_blobs, make_box, BlobsParams, Dataset, OracleHandle};
use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, laplacian, LaplacianOperator, SparseGraph};
use crate::ssl::{HypergraphOperator, RewireTerm, RewiredOperator};

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub trial: usize,
    pub iteration: usize,
    pub labels: usize,
    pub accuracy: f64,
    pub acq_value: Option<f64>,
    pub tau: f64,
    pub curvature: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

/// Records of one classifier over all trials, sorted by `(trial, iteration)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: String,
    pub records: Vec<RunRecord>,
    pub failures: Vec<TrialFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub methods: Vec<MethodRun>,
    /// Per trial, `None` where the coreset failed.
    pub coresets: Vec<Option<CoresetResult>>,
    /// Mean number of clusters covered after each coreset selection, when the
    /// dataset carries cluster ids.
    pub coverage: Option<Vec<f64>>,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let data = match &spec.kind {
        DatasetKind::Blobs {
            points_per_cluster,
            clusters,
            sigma,
            classes,
            seed,
        } => make_blobs(&BlobsParams {
            points_per_cluster: *points_per_cluster,
            clusters: *clusters,
            sigma: *sigma,
            classes: *classes,
            seed: *seed,
        })?,
        DatasetKind::Box { side, boundary } => make_box(*side, *boundary)?,
        DatasetKind::File {
            points,
            labels,
            classes,
        } => load_embeddings(points, Some(labels.as_path()), *classes)?,
    };
    match spec.modulo {
        Some(m) => data.relabeled_modulo(m),
        None => Ok(data),
    }
}

pub fn build_coreset(spec: &CoresetSpec, g: &SparseGraph, data: &Dataset, seed: u64) -> Result<CoresetResult> {
    match spec.method {
        CoresetMethod::Cc => curvature_coreset(g, spec.budget, spec.reduction, spec.stopping.as_ref(), seed),
        CoresetMethod::Dac => dac_coreset(g, &spec.dac, seed),
        CoresetMethod::Random => random_coreset(g.len(), spec.budget, seed),
        CoresetMethod::PerClass => {
            let labels = data
                .labels()
                .ok_or_else(|| Error::Config("per-class coreset needs labels".into()))?;
            per_class_coreset(labels, data.classes(), seed)
        }
    }
}

/// Mean clusters covered after `i + 1` selections; shorter coresets keep
/// their final count.
pub fn coverage_curve(coresets: &[&CoresetResult], clusters: &[usize]) -> Vec<f64> {
    let len = coresets.iter().map(|c| c.nodes.len()).max().unwrap_or(0);
    let mut sum = vec![0.0; len];
    for c in coresets {
        let mut seen = std::collections::BTreeSet::new();
        let mut last = 0;
        for (i, slot) in sum.iter_mut().enumerate() {
            if let Some(&v) = c.nodes.get(i) {
                seen.insert(clusters[v]);
                last = seen.len();
            }
            *slot += last as f64;
        }
    }
    let t = coresets.len().max(1) as f64;
    sum.into_iter().map(|s| s / t).collect()
}

/// Operators shared by every trial of one experiment.
struct Prepared {
    graph: SparseGraph,
    fine: Vec<SparseGraph>,
    laplacian: Option<LaplacianOperator>,
    hypergraph: Option<HypergraphOperator>,
    rewired: Option<RewiredOperator>,
}

impl Prepared {
    fn new(cfg: &ExperimentConfig, data: &Dataset) -> Result<Self> {
        let graph = build_knn_graph(data, cfg.k, cfg.metric)?;
        let needs = |k: ClassifierKind| cfg.classifiers.contains(&k);
        let multiscale = needs(ClassifierKind::Hypergraph) || needs(ClassifierKind::Rewired) || needs(ClassifierKind::RandomRewired);
        let fine = if multiscale {
            cfg.multiscale
                .fine_k
                .iter()
                .map(|&k| build_knn_graph(data, k, cfg.metric))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let m = &cfg.multiscale;
        let hypergraph = if needs(ClassifierKind::Hypergraph) {
            let mut graphs = vec![graph.clone()];
            graphs.extend(fine.iter().cloned());
            Some(HypergraphOperator::with_cap(&graphs, &m.powers, &m.weights, m.materialize_cap)?)
        } else {
            None
        };
        let rewired = if needs(ClassifierKind::Rewired) || needs(ClassifierKind::RandomRewired) {
            let terms = m.powers[1..]
                .iter()
                .zip(&m.weights[1..])
                .map(|(&power, &weight)| RewireTerm { power, weight })
                .collect();
            Some(RewiredOperator::new(&graph, m.powers[0], m.weights[0], terms)?)
        } else {
            None
        };
        Ok(Prepared {
            laplacian: needs(ClassifierKind::Laplace).then(|| laplacian(&graph)),
            graph,
            fine,
            hypergraph,
            rewired,
        })
    }

    fn classifier(&self, cfg: &ExperimentConfig, kind: ClassifierKind, classes: usize, seed: u64) -> Classifier<'_> {
        let missing = "operator prepared for every configured classifier";
        match kind {
            ClassifierKind::Laplace => Classifier::Laplace(self.laplacian.as_ref().expect(missing)),
            ClassifierKind::Hypergraph => Classifier::Hypergraph(self.hypergraph.as_ref().expect(missing)),
            ClassifierKind::Pwll => Classifier::Pwll {
                graph: &self.graph,
                tau0: cfg.tau0,
                schedule: match cfg.schedule {
                    ScheduleKind::Fixed => TauSchedule::Fixed,
                    ScheduleKind::Decay => TauSchedule::Decay { classes },
                    ScheduleKind::Curvature => TauSchedule::Curvature { k: cfg.k },
                },
            },
            ClassifierKind::Rewired | ClassifierKind::RandomRewired => Classifier::Rewired {
                op: self.rewired.clone().expect(missing),
                fine: &self.fine,
                focus: if kind == ClassifierKind::Rewired {
                    RewireFocus::Acquired
                } else {
                    RewireFocus::Random { seed }
                },
            },
        }
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    kind: ClassifierKind,
    truth: &[usize],
    classes: usize,
    trial: usize,
    coreset: &CoresetResult,
) -> Result<Vec<RunRecord>> {
    let seed = cfg.base_seed + trial as u64;
    let mut oracle = OracleHandle::new(truth.to_vec());
    let cls = prep.classifier(cfg, kind, classes, seed);
    let state = al_loop(&prep.graph, cls, cfg.acquisition, &coreset.nodes, cfg.al_budget, &mut oracle)?;
    Ok(state
        .history
        .into_iter()
        .map(|r| RunRecord {
            trial,
            iteration: r.iteration,
            labels: r.labels,
            accuracy: r.accuracy,
            acq_value: r.acq_value,
            tau: r.tau,
            curvature: r.curvature,
            wall_ms: if cfg.timing { r.wall_ms } else { 0.0 },
        })
        .collect())
}

/// Runs every configured classifier over all trials. Trials run in parallel
/// on the current rayon pool; a failing trial is logged and reported in the
/// output without stopping the others.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let data = load_dataset(&cfg.dataset)?;
    let truth = data
        .labels()
        .ok_or_else(|| Error::Config("dataset has no labels for the oracle".into()))?
        .to_vec();
    let prep = Prepared::new(cfg, &data)?;
    info!(
        "graph ready: {} nodes, {} edges; running {} trials",
        prep.graph.len(),
        prep.graph.edge_count(),
        cfg.trials
    );

    let coresets: Vec<Result<CoresetResult>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| build_coreset(&cfg.coreset, &prep.graph, &data, cfg.base_seed + t as u64))
        .collect();

    let mut methods = Vec::with_capacity(cfg.classifiers.len());
    for &kind in &cfg.classifiers {
        let results: Vec<Result<Vec<RunRecord>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| match &coresets[t] {
                Ok(c) => run_trial(cfg, &prep, kind, &truth, data.classes(), t, c),
                Err(e) => Err(Error::State(format!("coreset failed: {e}"))),
            })
            .collect();
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (trial, r) in results.into_iter().enumerate() {
            match r {
                Ok(recs) => records.extend(recs),
                Err(e) => {
                    error!("{} trial {trial} aborted: {e}", kind.name());
                    failures.push(TrialFailure {
                        trial,
                        error: e.to_string(),
                    });
                }
            }
        }
        records.sort_by_key(|r| (r.trial, r.iteration));
        methods.push(MethodRun {
            method: kind.name().to_string(),
            records,
            failures,
        });
    }

    let coresets: Vec<Option<CoresetResult>> = coresets.into_iter().map(Result::ok).collect();
    let coverage = data.clusters().map(|clusters| {
        let done: Vec<&CoresetResult> = coresets.iter().flatten().collect();
        coverage_curve(&done, clusters)
    });
    Ok(ExperimentOutput {
        methods,
        coresets,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &[&str]) -> ExperimentConfig {
        let text = "dataset.kind = blobs\ndataset.points_per_cluster = 30\ngraph.k = 8\ngraph.metric = euclidean\n\
                    coreset.method = cc\ncoreset.budget = 4\nal.budget = 5\ntrials = 3\n";
        let flags: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::from_text(text, &flags).unwrap()
    }

    #[test]
    fn records_are_sorted_and_complete() {
        let out = run_experiment(&small(&[])).unwrap();
        let m = &out.methods[0];
        assert!(m.failures.is_empty());
        assert_eq!(m.records.len(), 3 * 6);
        for w in m.records.windows(2) {
            assert!((w[0].trial, w[0].iteration) < (w[1].trial, w[1].iteration));
        }
        let cov = out.coverage.unwrap();
        assert_eq!(cov.len(), 4);
        assert!(cov.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_budget_gives_one_record_per_trial() {
        let out = run_experiment(&small(&["--al.budget", "0"])).unwrap();
        assert_eq!(out.methods[0].records.len(), 3);
    }

    #[test]
    fn failing_trials_are_isolated() {
        // cc budget larger than the graph fails in the coreset for every trial
        let out = run_experiment(&small(&["--coreset.budget", "1000"])).unwrap();
        assert_eq!(out.methods[0].failures.len(), 3);
        assert!(out.methods[0].records.is_empty());
    }

    #[test]
    fn every_classifier_runs() {
        let out = run_experiment(&small(&[
            "--classifier",
            "laplace,pwll,hypergraph,rewired,random-rewired",
            "--multiscale.fine_k",
            "5",
        ]))
        .unwrap();
        assert_eq!(out.methods.len(), 5);
        for m in &out.methods {
            assert!(m.failures.is_empty(), "{}: {:?}", m.method, m.failures);
            assert_eq!(m.records.len(), 18);
        }
    }
}
