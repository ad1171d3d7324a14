use log::warn;

use super::solver::{solve_dirichlet, Coupled, SolveOptions, SymOperator};
use crate::error::{Error, Result};
use crate::graph::{laplacian, SparseGraph};

/// One-hot targets on a labeled node set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    classes: usize,
    label: Vec<Option<usize>>,
    labeled: Vec<usize>,
}

impl LabelMatrix {
    /// `pairs` are `(node, class)`; nodes must be distinct.
    pub fn new(n: usize, classes: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if classes == 0 {
            return Err(Error::param("need at least one class"));
        }
        let mut label = vec![None; n];
        let mut labeled = Vec::with_capacity(pairs.len());
        for &(v, c) in pairs {
            if v >= n {
                return Err(Error::param(format!("labeled node {v} out of range for n = {n}")));
            }
            if c >= classes {
                return Err(Error::param(format!("class {c} out of range for K = {classes}")));
            }
            if label[v].replace(c).is_some() {
                return Err(Error::param(format!("node {v} labeled twice")));
            }
            labeled.push(v);
        }
        Ok(LabelMatrix {
            classes,
            label,
            labeled,
        })
    }

    /// Labels `nodes` from a ground-truth vector.
    pub fn from_truth(nodes: &[usize], truth: &[usize], classes: usize) -> Result<Self> {
        let mut pairs = Vec::with_capacity(nodes.len());
        for &v in nodes {
            let c = *truth
                .get(v)
                .ok_or_else(|| Error::param(format!("node {v} has no ground-truth label")))?;
            pairs.push((v, c));
        }
        Self::new(truth.len(), classes, &pairs)
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Labeled nodes in insertion order.
    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn label(&self, node: usize) -> Option<usize> {
        self.label[node]
    }

    pub fn is_labeled(&self, node: usize) -> bool {
        self.label[node].is_some()
    }

    /// Entry `S_{node, class}`.
    pub fn target(&self, node: usize, class: usize) -> f64 {
        if self.label[node] == Some(class) {
            1.0
        } else {
            0.0
        }
    }

    fn fixed_mask(&self) -> Vec<bool> {
        self.label.iter().map(Option::is_some).collect()
    }

    fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.classes)
            .map(|c| (0..self.len()).map(|v| self.target(v, c)).collect())
            .collect()
    }
}

/// Classifier scores, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    scores: Vec<f64>,
    classes: usize,
    residual: f64,
    uncovered: usize,
}

impl Solution {
    /// Builds a solution from row-major scores.
    pub fn from_rows(scores: Vec<f64>, classes: usize) -> Result<Self> {
        if classes == 0 || scores.len() % classes != 0 {
            return Err(Error::param("score length is not a multiple of the class count"));
        }
        Ok(Solution {
            scores,
            classes,
            residual: 0.0,
            uncovered: 0,
        })
    }

    fn from_columns(cols: Vec<Vec<f64>>, residual: f64, uncovered: usize) -> Result<Self> {
        let classes = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        let mut scores = vec![0.0; n * classes];
        for (c, col) in cols.iter().enumerate() {
            for (v, &x) in col.iter().enumerate() {
                scores[v * classes + c] = x;
            }
        }
        if let Some(pos) = scores.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numerical {
                iterations: 0,
                message: format!("non-finite score at node {}", pos / classes),
            });
        }
        Ok(Solution {
            scores,
            classes,
            residual,
            uncovered,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len() / self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.scores[node * self.classes..(node + 1) * self.classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.scores.chunks(self.classes)
    }

    /// Largest relative residual of the linear solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Nodes in components without any label; their rows are uniform.
    pub fn uncovered(&self) -> usize {
        self.uncovered
    }
}

/// Argmax per row, ties to the lowest class.
pub fn predict(sol: &Solution) -> Vec<usize> {
    sol.rows()
        .map(|row| {
            let mut best = 0;
            for (c, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Fixes every node of a label-free component to the uniform row. Those
/// components are decoupled from the rest, so this only removes the singular
/// blocks from the solve.
fn pin_uncovered(comps: &[usize], fixed: &mut [bool], boundary: &mut [Vec<f64>]) -> usize {
    let ncomp = comps.iter().max().map_or(0, |&m| m + 1);
    let mut covered = vec![false; ncomp];
    for (v, &c) in comps.iter().enumerate() {
        if fixed[v] {
            covered[c] = true;
        }
    }
    let uniform = 1.0 / boundary.len() as f64;
    let mut count = 0;
    for (v, &c) in comps.iter().enumerate() {
        if !covered[c] {
            fixed[v] = true;
            for col in boundary.iter_mut() {
                col[v] = uniform;
            }
            count += 1;
        }
    }
    if count > 0 {
        warn!("{count} nodes lie in components with no labeled node; scored uniformly");
    }
    count
}

fn check_labels(n: usize, labels: &LabelMatrix) -> Result<()> {
    if labels.len() != n {
        return Err(Error::param(format!(
            "label matrix has {} rows, operator has {n}",
            labels.len()
        )));
    }
    if labels.labeled().is_empty() {
        return Err(Error::param("labeled set is empty"));
    }
    Ok(())
}

/// Harmonic extension of the one-hot labels under `op`.
pub fn laplace_learn<O: Coupled + ?Sized>(op: &O, labels: &LabelMatrix) -> Result<Solution> {
    laplace_learn_with(op, labels, &SolveOptions::default())
}

pub fn laplace_learn_with<O: Coupled + ?Sized>(op: &O, labels: &LabelMatrix, opts: &SolveOptions) -> Result<Solution> {
    check_labels(op.dim(), labels)?;
    let mut fixed = labels.fixed_mask();
    let mut boundary = labels.columns();
    let uncovered = pin_uncovered(&op.components(), &mut fixed, &mut boundary);
    let (cols, rep) = solve_dirichlet(op, &fixed, &boundary, None, 0.0, opts)?;
    Solution::from_columns(cols, rep.residual, uncovered)
}

/// Positive node weights from the graph Poisson equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReweightFunction {
    gamma: Vec<f64>,
}

impl ReweightFunction {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if let Some(v) = gamma.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::param(format!("reweighting value at node {v} is not positive")));
        }
        Ok(ReweightFunction { gamma })
    }

    pub fn uniform(n: usize) -> Self {
        ReweightFunction { gamma: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }
}

/// Zero-mean solution of `L γ₀ = b`, `b_i = 1[i ∈ L] − |L ∩ C| / |C|` on each
/// component `C`, plus the true relative residual `‖L γ₀ − b‖ / ‖b‖`.
pub fn poisson_potential(g: &SparseGraph, labeled: &[usize]) -> Result<(Vec<f64>, f64)> {
    let n = g.len();
    if labeled.is_empty() {
        return Err(Error::param("labeled set is empty"));
    }
    let mut is_label = vec![false; n];
    for &v in labeled {
        if v >= n {
            return Err(Error::param(format!("labeled node {v} out of range for n = {n}")));
        }
        is_label[v] = true;
    }
    let comps = g.components();
    let ncomp = comps.iter().max().map_or(0, |&m| m + 1);
    let mut size = vec![0usize; ncomp];
    let mut hits = vec![0usize; ncomp];
    let mut ground = vec![usize::MAX; ncomp];
    for v in 0..n {
        let c = comps[v];
        size[c] += 1;
        hits[c] += is_label[v] as usize;
        ground[c] = ground[c].min(v);
    }
    let b: Vec<f64> = (0..n)
        .map(|v| {
            let c = comps[v];
            let l = if is_label[v] { 1.0 } else { 0.0 };
            l - hits[c] as f64 / size[c] as f64
        })
        .collect();
    let sum: f64 = b.iter().sum();
    assert!(
        sum.abs() <= 1e-9 * n as f64,
        "Poisson source does not sum to zero ({sum})"
    );

    let lap = laplacian(g);
    let mut fixed = vec![false; n];
    for &v in &ground {
        fixed[v] = true;
    }
    // the grounded rows hold automatically because b sums to zero per component
    let opts = SolveOptions {
        tol: 1e-11,
        max_iter: None,
    };
    let (mut cols, _) = solve_dirichlet(&lap, &fixed, &[vec![0.0; n]], Some(&[b.clone()]), 0.0, &opts)?;
    let mut g0 = cols.pop().expect("one column");

    let mut mean = vec![0.0; ncomp];
    for v in 0..n {
        mean[comps[v]] += g0[v];
    }
    for c in 0..ncomp {
        mean[c] /= size[c] as f64;
    }
    for v in 0..n {
        g0[v] -= mean[comps[v]];
    }

    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let residual = if bnorm == 0.0 {
        0.0
    } else {
        let lg = lap.matrix().apply(&g0);
        lg.iter().zip(&b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() / bnorm
    };
    Ok((g0, residual))
}

/// Positivity floor as a fraction of the potential's range.
pub const GAMMA_FLOOR: f64 = 0.01;

/// `γ = (γ₀ − min γ₀) + 0.01 (max γ₀ − min γ₀)`; a flat potential gives γ ≡ 1.
pub fn poisson_reweight(g: &SparseGraph, labeled: &[usize]) -> Result<ReweightFunction> {
    let (g0, _) = poisson_potential(g, labeled)?;
    let lo = g0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        return Ok(ReweightFunction::uniform(g.len()));
    }
    ReweightFunction::new(g0.iter().map(|x| (x - lo) + GAMMA_FLOOR * range).collect())
}

/// Graph with weights `γ_i γ_j w_ij`.
pub fn reweighted_graph(g: &SparseGraph, gamma: &ReweightFunction) -> Result<SparseGraph> {
    let gm = gamma.values();
    if gm.len() != g.len() {
        return Err(Error::param("reweighting length differs from graph size"));
    }
    g.reweighted(|i, j, w| gm[i] * gm[j] * w)
}

/// Solves `(L_γ + (τ/2) I)_UU U_U = −(L_γ)_UL S_L`.
pub fn pwll_learn(g: &SparseGraph, gamma: &ReweightFunction, labels: &LabelMatrix, tau: f64) -> Result<Solution> {
    pwll_learn_with(g, gamma, labels, tau, &SolveOptions::default())
}

pub fn pwll_learn_with(
    g: &SparseGraph,
    gamma: &ReweightFunction,
    labels: &LabelMatrix,
    tau: f64,
    opts: &SolveOptions,
) -> Result<Solution> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::param(format!("tau must be finite and nonnegative, got {tau}")));
    }
    let lap = laplacian(&reweighted_graph(g, gamma)?);
    if tau == 0.0 {
        return laplace_learn_with(&lap, labels, opts);
    }
    check_labels(lap.dim(), labels)?;
    let (cols, rep) = solve_dirichlet(&lap, &labels.fixed_mask(), &labels.columns(), None, tau / 2.0, opts)?;
    Solution::from_columns(cols, rep.residual, 0)
}

/// Decay floor reached at step `2K`.
pub const TAU_EPSILON: f64 = 1e-9;

/// `τ₀ μ^step` with `μ = (ε/τ₀)^{1/(2K)}` for `step < 2K`, zero afterwards.
pub fn tau_decay(tau0: f64, k: usize, step: usize) -> f64 {
    assert!(tau0 > 0.0 && k > 0, "tau_decay needs tau0 > 0 and K > 0");
    if step >= 2 * k {
        return 0.0;
    }
    let mu = (TAU_EPSILON / tau0).powf(1.0 / (2 * k) as f64);
    tau0 * mu.powi(step as i32)
}
