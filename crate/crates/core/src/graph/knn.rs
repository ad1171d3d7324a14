use rayon::prelude::*;

use super::{Dataset, SparseGraph};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Euclidean distance between unit-normalised vectors.
    #[default]
    Angular,
    Euclidean,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angular" => Ok(Metric::Angular),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact kNN graph with self-tuning Gaussian weights
/// `w_ij = exp(-4 |x_i - x_j|^2 / d_k(x_i)^2)`, symmetrised as `(W + W^T) / 2`.
///
/// Neighbors are ranked by `(distance, index)`. When a node's `k`-th neighbor
/// is an exact duplicate (`d_k = 0`) its edges get weight 1.
pub fn build_knn_graph(data: &Dataset, k: usize, metric: Metric) -> Result<SparseGraph> {
    let n = data.len();
    if k == 0 || k >= n {
        return Err(Error::param(format!("k = {k} must satisfy 1 <= k < n = {n}")));
    }
    let d = data.dim();
    let points: Vec<f64> = match metric {
        Metric::Euclidean => data.points().to_vec(),
        Metric::Angular => data
            .points()
            .chunks_exact(d)
            .flat_map(|row| {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                // zero vectors stay at the origin
                let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
                row.iter().map(move |v| v * scale)
            })
            .collect(),
    };
    let point = |i: usize| &points[i * d..(i + 1) * d];

    let directed: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = point(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(xi, point(j)), j))
                .collect();
            let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            cand.select_nth_unstable_by(k - 1, by_dist);
            cand.truncate(k);
            cand.sort_unstable_by(by_dist);
            let dk2 = cand[k - 1].0;
            cand.into_iter()
                .map(|(d2, j)| {
                    let w = if dk2 > 0.0 { (-4.0 * d2 / dk2).exp() } else { 1.0 };
                    (j, w)
                })
                .collect()
        })
        .collect();

    let mut trip = Vec::with_capacity(2 * n * k);
    for (i, row) in directed.iter().enumerate() {
        for &(j, w) in row {
            trip.push((i, j, 0.5 * w));
            trip.push((j, i, 0.5 * w));
        }
    }
    SparseGraph::from_weights(CsrMatrix::from_triplets(n, n, &trip))
}
