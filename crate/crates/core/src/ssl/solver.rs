//! Jacobi-preconditioned conjugate gradients on symmetric operators, plus the
//! Dirichlet (fixed-boundary) reduction every learner uses.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{components_of, LaplacianOperator};
use crate::sparse::CsrMatrix;

/// A symmetric linear operator on node functions.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = M x`
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Diagonal (or an SPD approximation of it) used for preconditioning.
    fn diagonal(&self) -> Vec<f64>;
}

/// Operators that can report which nodes they couple.
pub trait Coupled: SymOperator {
    /// Connected-component id per node of the coupling pattern.
    fn components(&self) -> Vec<usize>;
}

impl SymOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y);
    }

    fn diagonal(&self) -> Vec<f64> {
        CsrMatrix::diagonal(self)
    }
}

impl Coupled for CsrMatrix {
    fn components(&self) -> Vec<usize> {
        components_of(self.rows(), |i| self.row_indices(i))
    }
}

impl SymOperator for LaplacianOperator {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix().mul_vec(x, y);
    }

    fn diagonal(&self) -> Vec<f64> {
        self.matrix().diagonal()
    }
}

impl Coupled for LaplacianOperator {
    fn components(&self) -> Vec<usize> {
        self.matrix().components()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target relative residual `|b - A x| / |b|`.
    pub tol: f64,
    /// Defaults to ten times the system size.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    /// Largest iteration count over the right-hand sides.
    pub iterations: usize,
    /// Largest true relative residual over the right-hand sides.
    pub residual: f64,
}

impl SolveReport {
    fn merge(self, other: SolveReport) -> SolveReport {
        SolveReport {
            iterations: self.iterations.max(other.iterations),
            residual: self.residual.max(other.residual),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for one right-hand side. Returns the iterate with the
/// smallest recursive residual seen, so the reported residual never grows
/// with `max_iter`.
fn pcg(op: &dyn SymOperator, inv_diag: &[f64], b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let n = op.dim();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveReport::default()));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut best = x.clone();
    let mut best_res = 1.0;
    let mut iterations = 0;

    while iterations < max_iter && best_res > opts.tol {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::Numerical {
                iterations,
                message: format!("non-finite curvature p'Ap = {pap}"),
            });
        }
        if pap <= 0.0 {
            // search direction in the null space: no further progress possible
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        let res = norm(&r) / bnorm;
        if !res.is_finite() {
            return Err(Error::Numerical {
                iterations,
                message: format!("residual became {res}"),
            });
        }
        if res < best_res {
            best_res = res;
            best.copy_from_slice(&x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    let mut ax = vec![0.0; n];
    op.apply(&best, &mut ax);
    let true_res = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / bnorm;
    Ok((
        best,
        SolveReport {
            iterations,
            residual: true_res,
        },
    ))
}

fn inverse_diagonal(diag: &[f64]) -> Vec<f64> {
    diag.iter().map(|&d| if d > 0.0 && d.is_finite() { 1.0 / d } else { 1.0 }).collect()
}

/// Solves `M x = b` for every column of `rhs`, in parallel over columns.
pub fn solve_spd<O: SymOperator + ?Sized>(
    op: &O,
    rhs: &[Vec<f64>],
    opts: &SolveOptions,
) -> Result<(Vec<Vec<f64>>, SolveReport)> {
    let inv_diag = inverse_diagonal(&op.diagonal());
    solve_columns(&AsDyn(op), &inv_diag, rhs, opts)
}

struct AsDyn<'a, O: ?Sized>(&'a O);

impl<O: SymOperator + ?Sized> SymOperator for AsDyn<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y)
    }
    fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }
}

fn solve_columns(
    op: &dyn SymOperator,
    inv_diag: &[f64],
    rhs: &[Vec<f64>],
    opts: &SolveOptions,
) -> Result<(Vec<Vec<f64>>, SolveReport)> {
    for col in rhs {
        if col.len() != op.dim() {
            return Err(Error::param(format!(
                "right-hand side has length {}, system has {}",
                col.len(),
                op.dim()
            )));
        }
    }
    let results: Vec<Result<(Vec<f64>, SolveReport)>> =
        rhs.par_iter().map(|b| pcg(op, inv_diag, b, opts)).collect();
    let mut cols = Vec::with_capacity(rhs.len());
    let mut report = SolveReport::default();
    for r in results {
        let (x, rep) = r?;
        cols.push(x);
        report = report.merge(rep);
    }
    Ok((cols, report))
}

/// `(M + shift I)` restricted to the free nodes.
struct Restricted<'a> {
    op: &'a dyn SymOperator,
    free: &'a [usize],
    shift: f64,
}

impl SymOperator for Restricted<'_> {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.op.dim();
        let mut full = vec![0.0; n];
        for (k, &u) in self.free.iter().enumerate() {
            full[u] = x[k];
        }
        let mut out = vec![0.0; n];
        self.op.apply(&full, &mut out);
        for (k, &u) in self.free.iter().enumerate() {
            y[k] = out[u] + self.shift * x[k];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let d = self.op.diagonal();
        self.free.iter().map(|&u| d[u] + self.shift).collect()
    }
}

/// Solves `(M + shift I)_FF x_F = source_F - M_{F,B} x_B` for each column,
/// where `B` are the nodes with `fixed[v] = true` and `boundary` carries their
/// values (entries at free nodes are ignored). Returns full-length columns.
pub fn solve_dirichlet<O: SymOperator + ?Sized>(
    op: &O,
    fixed: &[bool],
    boundary: &[Vec<f64>],
    source: Option<&[Vec<f64>]>,
    shift: f64,
    opts: &SolveOptions,
) -> Result<(Vec<Vec<f64>>, SolveReport)> {
    let op = &AsDyn(op);
    let n = op.dim();
    assert_eq!(fixed.len(), n);
    let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();

    let mut rhs = Vec::with_capacity(boundary.len());
    let mut starts = Vec::with_capacity(boundary.len());
    for (c, col) in boundary.iter().enumerate() {
        let mut xb: Vec<f64> = col.clone();
        for &u in &free {
            xb[u] = 0.0;
        }
        let mut mb = vec![0.0; n];
        op.apply(&xb, &mut mb);
        let src = source.map(|s| &s[c]);
        rhs.push(
            free.iter()
                .map(|&u| src.map_or(0.0, |s| s[u]) - mb[u])
                .collect::<Vec<f64>>(),
        );
        starts.push(xb);
    }

    let sys = Restricted {
        op,
        free: &free,
        shift,
    };
    let inv_diag = inverse_diagonal(&sys.diagonal());
    let (sol, report) = solve_columns(&sys, &inv_diag, &rhs, opts)?;
    let cols = starts
        .into_iter()
        .zip(sol)
        .map(|(mut full, xf)| {
            for (k, &u) in free.iter().enumerate() {
                full[u] = xf[k];
            }
            full
        })
        .collect();
    Ok((cols, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let id = CsrMatrix::identity(4);
        let b = vec![vec![1.0, -2.0, 3.5, 0.0], vec![0.0; 4]];
        let (x, rep) = solve_spd(&id, &b, &SolveOptions::default()).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let b = vec![vec![1.0, 2.0]];
        let opts = SolveOptions {
            tol: 1e-15,
            max_iter: None,
        };
        let (x, _) = solve_spd(&a, &b, &opts).unwrap();
        // inverse = [[3, -1], [-1, 4]] / 11
        let expect = [(3.0 - 2.0) / 11.0, (-1.0 + 8.0) / 11.0];
        assert!((x[0][0] - expect[0]).abs() < 1e-15);
        assert!((x[0][1] - expect[1]).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_on_a_path() {
        // L of path 0-1-2; fix ends at 0 and 1
        let l = CsrMatrix::from_dense(&[vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]);
        let fixed = [true, false, true];
        let (x, _) = solve_dirichlet(&l, &fixed, &[vec![0.0, 0.0, 1.0]], None, 0.0, &SolveOptions::default()).unwrap();
        assert_eq!(x[0], vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn non_finite_input_is_a_numerical_error() {
        let a = CsrMatrix::from_dense(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]);
        let err = solve_spd(&a, &[vec![1.0, 1.0]], &SolveOptions::default());
        assert!(matches!(err, Err(Error::Numerical { .. })));
    }
}
