//! Compressed sparse row storage and the handful of kernels the learners need.
//!
//! Column indices within a row are always sorted and unique, which makes
//! equality comparisons and symmetric checks exact.

use rayon::prelude::*;

use crate::error::{Error, Result};

const PARALLEL_NNZ: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// in input order; explicit zeros are kept.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; rows + 1];
        for &(i, j, _) in triplets {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) out of bounds");
            counts[i + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols_buf = vec![0usize; triplets.len()];
        let mut vals_buf = vec![0.0f64; triplets.len()];
        for &(i, j, v) in triplets {
            let slot = next[i];
            cols_buf[slot] = j;
            vals_buf[slot] = v;
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..rows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|s| (cols_buf[s], vals_buf[s])));
            // stable sort keeps summation order of duplicates deterministic
            row.sort_by_key(|&(j, _)| j);
            let mut it = row.iter().peekable();
            while let Some(&(j, mut v)) = it.next() {
                while let Some(&&(j2, v2)) = it.peek() {
                    if j2 != j {
                        break;
                    }
                    v += v2;
                    it.next();
                }
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut trip = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m, "ragged dense input");
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, m, &trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn row_indices(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.data[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_indices(i)
            .iter()
            .copied()
            .zip(self.row_values(i).iter().copied())
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.row_indices(i).binary_search(&j) {
            Ok(p) => self.row_values(i)[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row_values(i).iter().sum())
            .collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let trip: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        CsrMatrix::from_triplets(self.cols, self.rows, &trip)
    }

    /// Exact (bitwise) symmetry check.
    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        self.iter().all(|(i, j, v)| {
            match self.row_indices(j).binary_search(&i) {
                Ok(p) => self.row_values(j)[p].to_bits() == v.to_bits(),
                Err(_) => v == 0.0,
            }
        })
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn scale(&self, alpha: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// alpha * self + beta * other, merged row by row.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut data = Vec::with_capacity(self.nnz().max(other.nnz()));
        indptr.push(0);
        for i in 0..self.rows {
            let (a_idx, a_val) = (self.row_indices(i), self.row_values(i));
            let (b_idx, b_val) = (other.row_indices(i), other.row_values(i));
            let (mut p, mut q) = (0, 0);
            while p < a_idx.len() || q < b_idx.len() {
                let take_a = q >= b_idx.len() || (p < a_idx.len() && a_idx[p] < b_idx[q]);
                let take_b = p >= a_idx.len() || (q < b_idx.len() && b_idx[q] < a_idx[p]);
                if take_a {
                    indices.push(a_idx[p]);
                    data.push(alpha * a_val[p]);
                    p += 1;
                } else if take_b {
                    indices.push(b_idx[q]);
                    data.push(beta * b_val[q]);
                    q += 1;
                } else {
                    indices.push(a_idx[p]);
                    data.push(alpha * a_val[p] + beta * b_val[q]);
                    p += 1;
                    q += 1;
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            data,
        }
    }

    /// Upper bound on the stored entries of `self * other`, used as a memory guard.
    pub fn product_nnz_bound(&self, other: &CsrMatrix) -> usize {
        (0..self.rows)
            .map(|i| {
                let s: usize = self.row_indices(i).iter().map(|&k| other.row_nnz(k)).sum();
                s.min(other.cols)
            })
            .sum()
    }

    /// Sparse product (Gustavson), parallel over rows for large operands.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.cols, other.rows);
        let m = other.cols;
        let init = || (vec![0.0f64; m], vec![false; m], Vec::<usize>::new());
        let product_row = |(acc, mark, touched): &mut (Vec<f64>, Vec<bool>, Vec<usize>), i: usize| {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            let mut idx = Vec::with_capacity(touched.len());
            let mut val = Vec::with_capacity(touched.len());
            for &j in touched.iter() {
                idx.push(j);
                val.push(acc[j]);
                acc[j] = 0.0;
                mark[j] = false;
            }
            (idx, val)
        };
        let rows: Vec<(Vec<usize>, Vec<f64>)> = if self.nnz() < PARALLEL_NNZ {
            let mut scratch = init();
            (0..self.rows).map(|i| product_row(&mut scratch, i)).collect()
        } else {
            (0..self.rows)
                .into_par_iter()
                .map_init(init, product_row)
                .collect()
        };
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let total: usize = rows.iter().map(|r| r.0.len()).sum();
        let mut indices = Vec::with_capacity(total);
        let mut data = Vec::with_capacity(total);
        for (idx, val) in rows {
            indices.extend(idx);
            data.extend(val);
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: self.rows,
            cols: m,
            indptr,
            indices,
            data,
        }
    }

    /// Symmetrizes an already-symmetric-in-pattern product so that
    /// `A[i][j]` and `A[j][i]` are bitwise equal (averaging the two roundings).
    pub fn symmetrize_exact(&self) -> CsrMatrix {
        // IEEE addition commutes, so both triangles round identically
        self.add_scaled(0.5, &self.transpose(), 0.5)
    }

    /// `self^p` for square matrices, refusing when the estimated fill exceeds `max_nnz`.
    pub fn power(&self, p: u32, max_nnz: usize) -> Result<CsrMatrix> {
        if p == 0 {
            return Err(Error::param("matrix power must be at least 1"));
        }
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for _ in 1..p {
            let bound = out.product_nnz_bound(self);
            if bound > max_nnz {
                return Err(Error::Resource(format!(
                    "matrix power would store up to {bound} entries (limit {max_nnz})"
                )));
            }
            out = out.matmul(self);
        }
        Ok(out)
    }

    /// Same shape, keeping only the entries for which `keep(i, j, v)` holds.
    pub fn keep_entries<F>(&self, mut keep: F) -> CsrMatrix
    where
        F: FnMut(usize, usize, f64) -> bool,
    {
        let trip: Vec<_> = self.iter().filter(|&(i, j, v)| keep(i, j, v)).collect();
        CsrMatrix::from_triplets(self.rows, self.cols, &trip)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, -1.0)]);
        assert_eq!(m.row_indices(0), &[0, 2]);
        assert_eq!(m.row_values(0), &[2.0, 4.0]);
        assert_eq!(m.get(1, 1), -1.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let b = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![4.0, 5.0]]);
        assert_eq!(a.matmul(&b).to_dense(), vec![vec![1.0, 2.0], vec![12.0, 15.0]]);
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let b = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(a.add_scaled(2.0, &b, 3.0).to_dense(), vec![vec![2.0, 3.0], vec![0.0, 7.0]]);
    }

    #[test]
    fn power_guard_trips() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(a.power(2, 3), Err(Error::Resource(_))));
        assert_eq!(a.power(2, 4).unwrap().to_dense(), vec![vec![2.0, 2.0], vec![2.0, 2.0]]);
        assert!(a.power(0, 10).is_err());
    }

    #[test]
    fn symmetry_is_bitwise() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 0.1 + 0.2], vec![0.3, 0.0]]);
        assert!(!a.is_symmetric());
        assert!(a.symmetrize_exact().is_symmetric());
    }
}
