//! Sparse similarity graphs and the operators derived from them.

mod dijkstra;
mod io;
mod knn;
mod laplacian;

pub use dijkstra::{ball, dijkstra_multisource, EdgeLength};
pub use io::{read_graph, write_graph};
pub use knn::{build_knn_graph, Metric};
pub use laplacian::{
    laplacian, localized_laplacian, localized_laplacian_power, localized_weights, operator_power,
    LaplacianOperator, Provenance, DEFAULT_MAX_NNZ,
};

pub use crate::data::Dataset;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Symmetric nonnegative weights with an empty diagonal.
///
/// The binary adjacency is the sparsity pattern of the weights, so neighbor
/// lists are read straight from the CSR index arrays (sorted, unique).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    weights: CsrMatrix,
}

impl SparseGraph {
    /// Validates and wraps a weight matrix. Stored zeros are dropped.
    pub fn from_weights(weights: CsrMatrix) -> Result<Self> {
        if weights.rows() != weights.cols() {
            return Err(Error::param("weight matrix must be square"));
        }
        for (i, j, w) in weights.iter() {
            if i == j && w != 0.0 {
                return Err(Error::param(format!("self-loop at node {i}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::param(format!("invalid weight {w} on edge ({i}, {j})")));
            }
        }
        if !weights.is_symmetric() {
            return Err(Error::param("weight matrix is not symmetric"));
        }
        let weights = weights.keep_entries(|_, _, w| w > 0.0);
        Ok(SparseGraph { weights })
    }

    /// Undirected graph from an edge list; each pair is stored in both directions.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut trip = Vec::with_capacity(2 * edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::param(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            trip.push((i, j, w));
            trip.push((j, i, w));
        }
        Self::from_weights(CsrMatrix::from_triplets(n, n, &trip))
    }

    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let e: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_edges(n, &e)
    }

    pub fn len(&self) -> usize {
        self.weights.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weights(&self) -> &CsrMatrix {
        &self.weights
    }

    /// Sorted neighbor list (the nonzero columns of row `i`).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.weights.row_indices(i)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.weights.row_nnz(i)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.weights.nnz() / 2
    }

    /// Copy of the graph with each weight replaced by `f(i, j, w)`; `f` must
    /// be symmetric in `(i, j)`.
    pub fn reweighted<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(usize, usize, f64) -> f64,
    {
        let trip: Vec<_> = self.weights.iter().map(|(i, j, w)| (i, j, f(i, j, w))).collect();
        Self::from_weights(CsrMatrix::from_triplets(self.len(), self.len(), &trip))
    }

    /// Connected-component id per node, numbered in order of first node.
    pub fn components(&self) -> Vec<usize> {
        components_of(self.len(), |i| self.neighbors(i))
    }
}

pub(crate) fn components_of<'a, F>(n: usize, neighbors: F) -> Vec<usize>
where
    F: Fn(usize) -> &'a [usize],
{
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_and_loops() {
        let asym = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert!(SparseGraph::from_weights(asym).is_err());
        let looped = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(SparseGraph::from_weights(looped).is_err());
        let neg = CsrMatrix::from_dense(&[vec![0.0, -1.0], vec![-1.0, 0.0]]);
        assert!(SparseGraph::from_weights(neg).is_err());
    }

    #[test]
    fn degrees_count_neighbors() {
        let g = fixtures::star(5);
        assert_eq!(g.degrees(), vec![4, 1, 1, 1, 1]);
        assert_eq!(g.edge_count(), 4);
        assert!(g.has_edge(3, 0));
        assert!(!g.has_edge(3, 1));
    }

    #[test]
    fn components_split() {
        let g = SparseGraph::unweighted(5, &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![0, 0, 1, 2, 2]);
    }
}
