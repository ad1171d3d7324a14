use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::error::{Error, Result};

/// Gaussian clusters evenly spaced on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobsParams {
    pub points_per_cluster: usize,
    pub clusters: usize,
    pub sigma: f64,
    /// Cluster `c` gets label `c mod classes`.
    pub classes: usize,
    pub seed: u64,
}

impl Default for BlobsParams {
    fn default() -> Self {
        BlobsParams {
            points_per_cluster: 300,
            clusters: 8,
            sigma: 0.17,
            classes: 2,
            seed: 0,
        }
    }
}

/// Cluster `c` is centred at angle `2πc/clusters`, counterclockwise from the
/// positive x-axis. The seed only drives the noise.
pub fn make_blobs(params: &BlobsParams) -> Result<Dataset> {
    let BlobsParams {
        points_per_cluster,
        clusters,
        sigma,
        classes,
        seed,
    } = *params;
    if clusters < 2 {
        return Err(Error::param("blobs need at least two clusters"));
    }
    if classes < 2 || classes > clusters {
        return Err(Error::param(format!(
            "class count {classes} must lie in 2..={clusters}"
        )));
    }
    if points_per_cluster == 0 || !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("blobs need a positive size and a finite sigma >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points_per_cluster * clusters;
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for c in 0..clusters {
        let angle = 2.0 * PI * c as f64 / clusters as f64;
        let (cy, cx) = angle.sin_cos();
        for _ in 0..points_per_cluster {
            let dx: f64 = StandardNormal.sample(&mut rng);
            let dy: f64 = StandardNormal.sample(&mut rng);
            points.push(cx + sigma * dx);
            points.push(cy + sigma * dy);
            labels.push(c % classes);
            ids.push(c);
        }
    }
    Ok(Dataset::new(points, 2, Some(labels))?
        .with_classes(classes)?
        .with_clusters(ids))
}

/// Regular `side × side` lattice on the unit square, split at `x = boundary`.
/// Node `i * side + j` sits at `(i, j) / (side - 1)`.
pub fn make_box(side: usize, boundary: f64) -> Result<Dataset> {
    if side < 2 {
        return Err(Error::param("box lattice needs side >= 2"));
    }
    let h = (side - 1) as f64;
    let mut points = Vec::with_capacity(2 * side * side);
    let mut labels = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let x = i as f64 / h;
            points.push(x);
            points.push(j as f64 / h);
            labels.push(usize::from(x >= boundary));
        }
    }
    Dataset::new(points, 2, Some(labels))?.with_classes(2)
}
