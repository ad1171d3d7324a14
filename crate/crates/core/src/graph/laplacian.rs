use super::SparseGraph;
use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Default fill limit for explicit matrix powers (about 1.2 GB of CSR storage).
pub const DEFAULT_MAX_NNZ: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Base,
    Multiscale,
    Rewired,
}

/// A symmetric positive semidefinite operator acting on node functions.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianOperator {
    matrix: CsrMatrix,
    provenance: Provenance,
}

impl LaplacianOperator {
    pub(crate) fn new(matrix: CsrMatrix, provenance: Provenance) -> Self {
        debug_assert_eq!(matrix.rows(), matrix.cols());
        LaplacianOperator { matrix, provenance }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// `self + alpha * other`, tagged with `provenance`.
    pub fn plus_scaled(&self, alpha: f64, other: &LaplacianOperator, provenance: Provenance) -> Self {
        LaplacianOperator::new(self.matrix.add_scaled(1.0, &other.matrix, alpha), provenance)
    }
}

fn laplacian_of(weights: &CsrMatrix) -> CsrMatrix {
    let n = weights.rows();
    let mut trip = Vec::with_capacity(weights.nnz() + n);
    for i in 0..n {
        let mut deg = 0.0;
        for (j, w) in weights.row(i) {
            deg += w;
            trip.push((i, j, -w));
        }
        if deg != 0.0 || weights.row_nnz(i) > 0 {
            trip.push((i, i, deg));
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// `L = D - W` with `D_ii = Σ_j W_ij`.
pub fn laplacian(g: &SparseGraph) -> LaplacianOperator {
    LaplacianOperator::new(laplacian_of(g.weights()), Provenance::Base)
}

/// Keeps `W_ij` only where `i ∈ S` or `j ∈ S`.
pub fn localized_weights(g: &SparseGraph, subset: &[usize]) -> CsrMatrix {
    let n = g.len();
    let mut member = vec![false; n];
    for &s in subset {
        member[s] = true;
    }
    let mut done = vec![false; n];
    let mut trip = Vec::new();
    for &i in subset {
        if std::mem::replace(&mut done[i], true) {
            continue;
        }
        for (j, w) in g.weights().row(i) {
            trip.push((i, j, w));
            // when j ∈ S the mirrored entry comes from j's own row
            if !member[j] {
                trip.push((j, i, w));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// Laplacian of the localized weights `W^S`.
pub fn localized_laplacian(g: &SparseGraph, subset: &[usize]) -> LaplacianOperator {
    LaplacianOperator::new(laplacian_of(&localized_weights(g, subset)), Provenance::Rewired)
}

/// `(L^S)^p`. For a single node the result is supported on its closed
/// `p`-hop neighborhood.
pub fn localized_laplacian_power(g: &SparseGraph, subset: &[usize], p: u32) -> Result<LaplacianOperator> {
    let base = localized_laplacian(g, subset);
    let m = base.matrix.power(p, DEFAULT_MAX_NNZ)?;
    Ok(LaplacianOperator::new(symmetrized(m, p), Provenance::Rewired))
}

/// `M^p` with an explicit fill guard; densification beyond `max_nnz` stored
/// entries is refused with a resource error.
pub fn operator_power(op: &LaplacianOperator, p: u32, max_nnz: usize) -> Result<LaplacianOperator> {
    let m = op.matrix.power(p, max_nnz)?;
    Ok(LaplacianOperator::new(symmetrized(m, p), op.provenance))
}

// Products of a symmetric matrix with itself can differ in the last bit across
// the diagonal; average the two triangles so symmetry is exact.
fn symmetrized(m: CsrMatrix, p: u32) -> CsrMatrix {
    if p == 1 {
        m
    } else {
        m.symmetrize_exact()
    }
}
