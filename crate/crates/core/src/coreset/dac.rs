use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CoresetResult;
use crate::error::{Error, Result};
use crate::graph::{ball, EdgeLength, SparseGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DacParams {
    /// Separation radius `r`: nodes closer than this to a pick are "seen".
    pub r_inner: f64,
    /// Coverage radius `R`: unseen nodes closer than this become candidates.
    pub r_outer: f64,
    pub edge_length: EdgeLength,
}

/// Dijkstra annulus coreset.
///
/// Balls are open (`d < radius`). Each step draws uniformly from the sorted
/// candidate set, or from the unseen nodes when no candidate remains, and the
/// run ends once every node has been seen.
pub fn dac_coreset(g: &SparseGraph, params: &DacParams, seed: u64) -> Result<CoresetResult> {
    let DacParams {
        r_inner,
        r_outer,
        edge_length,
    } = *params;
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(Error::param(format!(
            "DAC radii must satisfy 0 < r ({r_inner}) < R ({r_outer})"
        )));
    }
    let n = g.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = vec![false; n];
    let mut seen_count = 0;
    let mut candidates = BTreeSet::new();
    let mut nodes = Vec::new();

    while seen_count < n {
        let pick = if candidates.is_empty() {
            let unseen: Vec<usize> = (0..n).filter(|&v| !seen[v]).collect();
            unseen[rng.gen_range(0..unseen.len())]
        } else {
            let k = rng.gen_range(0..candidates.len());
            *candidates.iter().nth(k).expect("index within candidate set")
        };
        nodes.push(pick);
        for v in ball(g, pick, edge_length, r_inner) {
            if !seen[v] {
                seen[v] = true;
                seen_count += 1;
            }
            candidates.remove(&v);
        }
        for v in ball(g, pick, edge_length, r_outer) {
            if !seen[v] {
                candidates.insert(v);
            }
        }
    }
    Ok(CoresetResult {
        nodes,
        curvature_history: Vec::new(),
        stopped_early: false,
        stop_index: None,
    })
}
