//! Topology-aware active learning on similarity graphs.
//!
//! The crate builds sparse kNN graphs, selects initial labels by Balanced
//! Forman Curvature, runs graph-based semi-supervised classifiers (Laplace
//! learning, Poisson-reweighted Laplace learning with a decay term,
//! multiscale/hypergraph regularization and localized rewiring) and drives the
//! sequential active-learning loop on top of them.

pub mod error;
pub mod sparse;

pub mod data;
pub mod graph;
pub mod curvature;
pub mod coreset;
pub mod ssl;
pub mod active;
pub mod harness;

pub use error::{Error, Result};
