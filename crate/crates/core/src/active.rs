//! Acquisition functions and the sequential active learning loop.

use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::max_bfc_to_set;
use crate::data::OracleHandle;
use crate::error::{Error, Result};
use crate::graph::{LaplacianOperator, SparseGraph};
use crate::ssl::{
    laplace_learn, poisson_reweight, predict, pwll_learn, tau_decay, HypergraphOperator, LabelMatrix, RewiredOperator,
    Solution,
};

/// Per-node acquisition values; only entries at unlabeled nodes are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionScores {
    pub scores: Vec<f64>,
}

impl AcquisitionScores {
    /// Smallest score among nodes with `labeled[v] == false`, ties to the
    /// lowest index. `None` when every node is labeled.
    pub fn argmin(&self, labeled: &[bool]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (v, &s) in self.scores.iter().enumerate() {
            if labeled[v] {
                continue;
            }
            if best.map_or(true, |(_, b)| s < b) {
                best = Some((v, s));
            }
        }
        best
    }
}

/// Top score minus runner-up per row. Small margins are uncertain.
pub fn margin_uncertainty(sol: &Solution) -> Result<AcquisitionScores> {
    if sol.classes() < 2 {
        return Err(Error::param("margin needs at least two classes"));
    }
    let scores = sol
        .rows()
        .map(|row| {
            let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &x in row {
                if x > first {
                    second = first;
                    first = x;
                } else if x > second {
                    second = x;
                }
            }
            first - second
        })
        .collect();
    Ok(AcquisitionScores { scores })
}

/// Euclidean norm of each row.
pub fn min_norm(sol: &Solution) -> AcquisitionScores {
    let scores = sol.rows().map(|row| row.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    AcquisitionScores { scores }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acquisition {
    #[default]
    Margin,
    MinNorm,
}

impl Acquisition {
    pub fn score(&self, sol: &Solution) -> Result<AcquisitionScores> {
        match self {
            Acquisition::Margin => margin_uncertainty(sol),
            Acquisition::MinNorm => Ok(min_norm(sol)),
        }
    }
}

impl FromStr for Acquisition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(Acquisition::Margin),
            "min-norm" | "min_norm" => Ok(Acquisition::MinNorm),
            _ => Err(Error::Config(format!("unknown acquisition '{s}'"))),
        }
    }
}

/// How τ evolves for the Poisson-reweighted learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauSchedule {
    Fixed,
    /// Geometric decay reaching zero after `2 * classes` steps.
    Decay { classes: usize },
    /// One-way switch to zero on the curvature test with kNN parameter `k`.
    Curvature { k: usize },
}

/// Where the rewiring update is localized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewireFocus {
    Acquired,
    /// A uniformly random unlabeled node each step (control).
    Random { seed: u64 },
}

/// A classifier together with whatever state it carries through the loop.
pub enum Classifier<'a> {
    Laplace(&'a LaplacianOperator),
    Hypergraph(&'a HypergraphOperator),
    Pwll {
        graph: &'a SparseGraph,
        tau0: f64,
        schedule: TauSchedule,
    },
    Rewired {
        op: RewiredOperator,
        fine: &'a [SparseGraph],
        focus: RewireFocus,
    },
}

impl Classifier<'_> {
    fn initial_tau(&self) -> f64 {
        match self {
            Classifier::Pwll { tau0, .. } => *tau0,
            _ => 0.0,
        }
    }

    fn train(&self, labels: &LabelMatrix, tau: f64) -> Result<Solution> {
        match self {
            Classifier::Laplace(op) => laplace_learn(*op, labels),
            Classifier::Hypergraph(op) => laplace_learn(*op, labels),
            Classifier::Pwll { graph, .. } => {
                let gamma = poisson_reweight(graph, labels.labeled())?;
                pwll_learn(graph, &gamma, labels, tau)
            }
            Classifier::Rewired { op, .. } => laplace_learn(op, labels),
        }
    }
}

/// One row of the loop history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub labels: usize,
    pub accuracy: f64,
    /// Score of the node acquired this iteration; absent on the final train.
    pub acq_value: Option<f64>,
    /// τ used for this iteration's solve.
    pub tau: f64,
    /// Largest curvature from the acquired node to the labeled set, when the
    /// schedule computes it.
    pub curvature: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ALState {
    /// Initial nodes followed by acquisitions, in order.
    pub labeled: Vec<usize>,
    pub initial: usize,
    pub tau: f64,
    pub tau_frozen: bool,
    pub history: Vec<IterationRecord>,
    /// The unlabeled pool ran out before the budget was spent.
    pub exhausted: bool,
}

impl ALState {
    pub fn new(initial: &[usize], tau: f64) -> Self {
        ALState {
            labeled: initial.to_vec(),
            initial: initial.len(),
            tau,
            tau_frozen: false,
            history: Vec::new(),
            exhausted: false,
        }
    }

    /// Acquired nodes, excluding the initial set.
    pub fn acquisitions(&self) -> &[usize] {
        &self.labeled[self.initial..]
    }
}

/// `-2 + 4/k`, the largest curvature two nodes with disjoint neighborhoods
/// can have in a kNN graph. Summed term by term like the curvature itself so
/// the boundary case compares equal.
pub fn curvature_threshold(k: usize) -> f64 {
    let k = k as f64;
    -2.0 + 2.0 / k + 2.0 / k
}

/// Compares `max_j Ric(x_acq, j)` over the labeled set with the threshold and
/// freezes τ at zero when it is exceeded. Returns the maximum curvature.
pub fn curvature_tau_schedule(state: &mut ALState, g: &SparseGraph, x_acq: usize, k: usize) -> Result<Option<f64>> {
    if state.labeled.is_empty() {
        return Err(Error::State("labeled set is empty".into()));
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let ric = max_bfc_to_set(g, x_acq, &state.labeled)?;
    if let Some(r) = ric {
        if r > curvature_threshold(k) {
            state.tau = 0.0;
            state.tau_frozen = true;
        }
    }
    Ok(ric)
}

fn accuracy(pred: &[usize], truth: &[usize], labeled: &[bool]) -> f64 {
    let mut total = 0usize;
    let mut hit = 0usize;
    for v in 0..pred.len() {
        if !labeled[v] {
            total += 1;
            hit += (pred[v] == truth[v]) as usize;
        }
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

/// Runs `budget` rounds of train, acquire, query and update, then trains
/// once more. `history` gets one record per training (budget + 1 in total
/// unless the pool runs out first).
pub fn al_loop(
    g: &SparseGraph,
    mut classifier: Classifier<'_>,
    acquisition: Acquisition,
    initial: &[usize],
    budget: usize,
    oracle: &mut OracleHandle,
) -> Result<ALState> {
    let n = g.len();
    let truth = oracle.ground_truth().to_vec();
    if truth.len() != n {
        return Err(Error::param("oracle size differs from the graph"));
    }
    if initial.is_empty() {
        return Err(Error::param("initial labeled set is empty"));
    }
    let classes = truth.iter().max().map_or(1, |&m| m + 1).max(2);
    let mut is_labeled = vec![false; n];
    let mut pairs = Vec::with_capacity(initial.len() + budget);
    for &v in initial {
        if v >= n || std::mem::replace(&mut is_labeled[v], true) {
            return Err(Error::param(format!("initial node {v} is out of range or repeated")));
        }
        pairs.push((v, oracle.query(v)));
    }

    let mut state = ALState::new(initial, classifier.initial_tau());
    let mut rng = match classifier {
        Classifier::Rewired {
            focus: RewireFocus::Random { seed },
            ..
        } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };

    for iteration in 0..=budget {
        let start = Instant::now();
        let labels = LabelMatrix::new(n, classes, &pairs)?;
        let sol = classifier.train(&labels, state.tau)?;
        let tau_used = state.tau;

        let pick = if iteration < budget {
            let scores = acquisition.score(&sol)?;
            let pick = scores.argmin(&is_labeled);
            if pick.is_none() {
                state.exhausted = true;
            }
            pick
        } else {
            None
        };

        let mut curvature = None;
        if let Some((x, _)) = pick {
            match &mut classifier {
                Classifier::Pwll { schedule, tau0, graph } => match *schedule {
                    TauSchedule::Fixed => {}
                    TauSchedule::Decay { classes } => {
                        state.tau = tau_decay(*tau0, classes, iteration + 1);
                    }
                    TauSchedule::Curvature { k } => {
                        curvature = curvature_tau_schedule(&mut state, graph, x, k)?;
                    }
                },
                Classifier::Rewired { op, fine, focus } => {
                    let center = match focus {
                        RewireFocus::Acquired => x,
                        RewireFocus::Random { .. } => {
                            let pool: Vec<usize> = (0..n).filter(|&v| !is_labeled[v] && v != x).collect();
                            let rng = rng.as_mut().expect("random focus has a generator");
                            *pool.choose(rng).unwrap_or(&x)
                        }
                    };
                    op.rewire_update(fine, center)?;
                }
                _ => {}
            }
        }
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;

        state.history.push(IterationRecord {
            iteration,
            labels: pairs.len(),
            accuracy: accuracy(&predict(&sol), &truth, &is_labeled),
            acq_value: pick.map(|(_, s)| s),
            tau: tau_used,
            curvature,
            wall_ms,
        });

        match pick {
            Some((x, _)) => {
                is_labeled[x] = true;
                pairs.push((x, oracle.query(x)));
                state.labeled.push(x);
            }
            None => break,
        }
    }
    Ok(state)
}
