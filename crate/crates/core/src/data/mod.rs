//! Datasets: synthetic generators, embedding files, label transforms and the
//! ground-truth oracle.

mod io;
mod oracle;
mod synth;

pub use io::{load_embeddings, load_labels, load_points, save_labels, save_points, save_points_binary};
pub use oracle::OracleHandle;
pub use synth::{make_blobs, make_box, BlobsParams};

use crate::error::{Error, Result};

/// Feature vectors stored row-major, with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    dim: usize,
    labels: Option<Vec<usize>>,
    classes: usize,
    /// Generator-specific grouping (e.g. blob id); not used for learning.
    clusters: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<f64>, dim: usize, labels: Option<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        if points.len() % dim != 0 {
            return Err(Error::param(format!(
                "{} coordinates do not divide into rows of dimension {dim}",
                points.len()
            )));
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(Error::param("dataset must contain at least one point"));
        }
        if let Some(p) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite coordinate in row {}", p / dim)));
        }
        let classes = match &labels {
            Some(l) => {
                if l.len() != n {
                    return Err(Error::param(format!("{} labels for {n} points", l.len())));
                }
                l.iter().max().map_or(0, |&m| m + 1)
            }
            None => 0,
        };
        Ok(Dataset {
            points,
            n,
            dim,
            labels,
            classes,
            clusters: None,
        })
    }

    /// Declares the class count explicitly; every label must be below it.
    pub fn with_classes(mut self, classes: usize) -> Result<Self> {
        if let Some(l) = &self.labels {
            if let Some(&bad) = l.iter().find(|&&v| v >= classes) {
                return Err(Error::param(format!("label {bad} is not below class count {classes}")));
            }
        }
        self.classes = classes;
        Ok(self)
    }

    pub fn with_clusters(mut self, clusters: Vec<usize>) -> Self {
        assert_eq!(clusters.len(), self.n);
        self.clusters = Some(clusters);
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn clusters(&self) -> Option<&[usize]> {
        self.clusters.as_deref()
    }

    /// Replaces labels by `label mod m`.
    pub fn relabeled_modulo(&self, m: usize) -> Result<Self> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::param("dataset has no labels to relabel"))?;
        let mut out = self.clone();
        out.labels = Some(modulo_relabel(labels, m)?);
        out.classes = m;
        Ok(out)
    }
}

/// Maps every label to `label mod m`; the result has `m` classes.
pub fn modulo_relabel(labels: &[usize], m: usize) -> Result<Vec<usize>> {
    if m < 2 {
        return Err(Error::param("modulus must be at least 2"));
    }
    Ok(labels.iter().map(|&l| l % m).collect())
}
