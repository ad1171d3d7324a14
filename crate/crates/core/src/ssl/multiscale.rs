use super::solver::{Coupled, SymOperator};
use crate::error::{Error, Result};
use crate::graph::{laplacian, localized_laplacian_power, operator_power, LaplacianOperator, Provenance, SparseGraph, DEFAULT_MAX_NNZ};
use crate::sparse::CsrMatrix;

/// Largest graph for which the hypergraph operator is stored explicitly.
pub const DEFAULT_MATERIALIZE_CAP: usize = 20_000;

fn check_scales(graphs: &[SparseGraph], powers: &[u32], weights: &[f64]) -> Result<usize> {
    if graphs.is_empty() {
        return Err(Error::param("need at least one scale"));
    }
    if graphs.len() != powers.len() || graphs.len() != weights.len() {
        return Err(Error::param(format!(
            "{} graphs, {} powers, {} weights",
            graphs.len(),
            powers.len(),
            weights.len()
        )));
    }
    let n = graphs[0].len();
    if graphs.iter().any(|g| g.len() != n) {
        return Err(Error::param("scale graphs differ in size"));
    }
    if powers.iter().any(|&p| p == 0) || powers.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param(format!("powers must be positive and nondecreasing: {powers:?}")));
    }
    if let Some(l) = weights.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::param(format!("scale weight {l} is not positive")));
    }
    Ok(n)
}

/// `Σ_k λ_k L_k^{p_k}`, accumulated left to right.
pub fn multiscale_operator(graphs: &[SparseGraph], powers: &[u32], weights: &[f64]) -> Result<LaplacianOperator> {
    multiscale_operator_with(graphs, powers, weights, DEFAULT_MAX_NNZ)
}

pub fn multiscale_operator_with(
    graphs: &[SparseGraph],
    powers: &[u32],
    weights: &[f64],
    max_nnz: usize,
) -> Result<LaplacianOperator> {
    check_scales(graphs, powers, weights)?;
    let mut acc = scaled_power(&graphs[0], powers[0], weights[0], max_nnz)?;
    for k in 1..graphs.len() {
        let term = operator_power(&laplacian(&graphs[k]), powers[k], max_nnz)?;
        acc = acc.plus_scaled(weights[k], &term, Provenance::Multiscale);
    }
    Ok(LaplacianOperator::new(acc.matrix().clone(), Provenance::Multiscale))
}

fn scaled_power(g: &SparseGraph, p: u32, lambda: f64, max_nnz: usize) -> Result<LaplacianOperator> {
    let m = operator_power(&laplacian(g), p, max_nnz)?;
    Ok(LaplacianOperator::new(m.matrix().scale(lambda), m.provenance()))
}

/// The full multiscale operator, stored explicitly on small graphs and
/// applied term by term otherwise.
#[derive(Debug, Clone)]
pub enum HypergraphOperator {
    Materialized(LaplacianOperator),
    MatrixFree {
        terms: Vec<(LaplacianOperator, u32, f64)>,
        pattern: CsrMatrix,
    },
}

impl HypergraphOperator {
    pub fn new(graphs: &[SparseGraph], powers: &[u32], weights: &[f64]) -> Result<Self> {
        Self::with_cap(graphs, powers, weights, DEFAULT_MATERIALIZE_CAP)
    }

    pub fn with_cap(graphs: &[SparseGraph], powers: &[u32], weights: &[f64], cap: usize) -> Result<Self> {
        let n = check_scales(graphs, powers, weights)?;
        if n <= cap {
            return Ok(HypergraphOperator::Materialized(multiscale_operator(graphs, powers, weights)?));
        }
        let terms: Vec<_> = graphs
            .iter()
            .zip(powers)
            .zip(weights)
            .map(|((g, &p), &l)| (laplacian(g), p, l))
            .collect();
        let mut pattern = CsrMatrix::zeros(n, n);
        for (l, _, _) in &terms {
            pattern = pattern.add_scaled(1.0, l.matrix(), 1.0);
        }
        Ok(HypergraphOperator::MatrixFree { terms, pattern })
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self, HypergraphOperator::Materialized(_))
    }
}

impl SymOperator for HypergraphOperator {
    fn dim(&self) -> usize {
        match self {
            HypergraphOperator::Materialized(m) => m.len(),
            HypergraphOperator::MatrixFree { pattern, .. } => pattern.rows(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            HypergraphOperator::Materialized(m) => m.apply(x, y),
            HypergraphOperator::MatrixFree { terms, .. } => {
                y.iter_mut().for_each(|v| *v = 0.0);
                let mut cur = vec![0.0; x.len()];
                let mut next = vec![0.0; x.len()];
                for (l, p, lambda) in terms {
                    cur.copy_from_slice(x);
                    for _ in 0..*p {
                        l.matrix().mul_vec(&cur, &mut next);
                        std::mem::swap(&mut cur, &mut next);
                    }
                    for (yi, ci) in y.iter_mut().zip(&cur) {
                        *yi += lambda * ci;
                    }
                }
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            HypergraphOperator::Materialized(m) => SymOperator::diagonal(m),
            HypergraphOperator::MatrixFree { terms, pattern } => {
                let mut d = vec![0.0; pattern.rows()];
                for (l, p, lambda) in terms {
                    let m = l.matrix();
                    for (i, di) in d.iter_mut().enumerate() {
                        let v = match p {
                            1 => m.get(i, i),
                            // symmetric: (L²)_ii = Σ_j L_ij²
                            2 => m.row_values(i).iter().map(|x| x * x).sum(),
                            _ => m.get(i, i).powi(*p as i32),
                        };
                        *di += lambda * v;
                    }
                }
                d
            }
        }
    }
}

impl Coupled for HypergraphOperator {
    fn components(&self) -> Vec<usize> {
        match self {
            HypergraphOperator::Materialized(m) => m.components(),
            HypergraphOperator::MatrixFree { pattern, .. } => pattern.components(),
        }
    }
}

/// One fine scale of the rewiring update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewireTerm {
    pub power: u32,
    pub weight: f64,
}

/// Base operator plus localized multiscale terms added at acquired nodes.
#[derive(Debug, Clone)]
pub struct RewiredOperator {
    op: LaplacianOperator,
    terms: Vec<RewireTerm>,
    updates: usize,
}

impl RewiredOperator {
    /// Starts from `λ₁ L₁^{p₁}`.
    pub fn new(base: &SparseGraph, power: u32, weight: f64, terms: Vec<RewireTerm>) -> Result<Self> {
        let mut powers = vec![power];
        let mut weights = vec![weight];
        powers.extend(terms.iter().map(|t| t.power));
        weights.extend(terms.iter().map(|t| t.weight));
        // the fine graphs are only needed at update time; validate parameters on the base
        let graphs = vec![base.clone(); powers.len()];
        check_scales(&graphs, &powers, &weights)?;
        let op = scaled_power(base, power, weight, DEFAULT_MAX_NNZ)?;
        Ok(RewiredOperator {
            op: LaplacianOperator::new(op.matrix().clone(), Provenance::Rewired),
            terms,
            updates: 0,
        })
    }

    pub fn operator(&self) -> &LaplacianOperator {
        &self.op
    }

    pub fn terms(&self) -> &[RewireTerm] {
        &self.terms
    }

    /// Number of updates applied so far.
    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Adds `λ_k (L_k^{x})^{p_k}` for every fine scale.
    pub fn rewire_update(&mut self, fine: &[SparseGraph], node: usize) -> Result<()> {
        self.rewire_update_set(fine, &[node])
    }

    /// Same update localized on a node set.
    pub fn rewire_update_set(&mut self, fine: &[SparseGraph], nodes: &[usize]) -> Result<()> {
        if fine.len() != self.terms.len() {
            return Err(Error::param(format!(
                "{} fine graphs for {} rewiring terms",
                fine.len(),
                self.terms.len()
            )));
        }
        let n = self.op.len();
        if let Some(&v) = nodes.iter().find(|&&v| v >= n) {
            return Err(Error::param(format!("node {v} out of range for n = {n}")));
        }
        if fine.iter().any(|g| g.len() != n) {
            return Err(Error::param("fine graph size differs from the operator"));
        }
        for (g, t) in fine.iter().zip(&self.terms) {
            let local = localized_laplacian_power(g, nodes, t.power)?;
            self.op = self.op.plus_scaled(t.weight, &local, Provenance::Rewired);
        }
        self.updates += 1;
        Ok(())
    }
}

impl SymOperator for RewiredOperator {
    fn dim(&self) -> usize {
        self.op.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        SymOperator::diagonal(&self.op)
    }
}

impl Coupled for RewiredOperator {
    fn components(&self) -> Vec<usize> {
        self.op.components()
    }
}
