use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SparseGraph;
use crate::error::{Error, Result};

/// How an edge weight turns into a path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLength {
    /// Every edge has length 1 (hop distance).
    #[default]
    Unit,
    /// `-ln w`; weights in (0, 1] give nonnegative lengths.
    NegLog,
    /// `1 / w`.
    Inverse,
}

impl EdgeLength {
    fn length(self, w: f64) -> f64 {
        match self {
            EdgeLength::Unit => 1.0,
            EdgeLength::NegLog => (-w.ln()).max(0.0),
            EdgeLength::Inverse => 1.0 / w,
        }
    }
}

impl std::str::FromStr for EdgeLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(EdgeLength::Unit),
            "neg-log" => Ok(EdgeLength::NegLog),
            "inverse" => Ok(EdgeLength::Inverse),
            other => Err(Error::Config(format!("unknown edge length {other:?}"))),
        }
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn run(g: &SparseGraph, sources: &[usize], len: EdgeLength, limit: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(State { dist: 0.0, node: s });
    }
    while let Some(State { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for (v, w) in g.weights().row(u) {
            let nd = d + len.length(w);
            if nd < dist[v] && nd < limit {
                dist[v] = nd;
                heap.push(State { dist: nd, node: v });
            }
        }
    }
    dist
}

/// Shortest-path distance from the nearest source; unreachable nodes are `+inf`.
pub fn dijkstra_multisource(g: &SparseGraph, sources: &[usize], len: EdgeLength) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::param("multi-source Dijkstra needs at least one source"));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= g.len()) {
        return Err(Error::param(format!("source {s} out of range")));
    }
    Ok(run(g, sources, len, f64::INFINITY))
}

/// Open ball `{v : d(source, v) < radius}`, sorted by node index.
pub fn ball(g: &SparseGraph, source: usize, len: EdgeLength, radius: f64) -> Vec<usize> {
    if radius <= 0.0 {
        return Vec::new();
    }
    let dist = run(g, &[source], len, radius);
    dist.iter()
        .enumerate()
        .filter(|(_, &d)| d < radius)
        .map(|(i, _)| i)
        .collect()
}
