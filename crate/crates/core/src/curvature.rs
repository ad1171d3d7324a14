//! Balanced Forman Curvature between arbitrary node pairs.
//!
//! All quantities use only the binary adjacency (the sparsity pattern of the
//! graph), and are evaluated whether or not the pair is itself an edge.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SparseGraph;

/// Triangle and 4-cycle counts around a node pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NeighborhoodStats {
    /// `|N(i) ∩ N(j)|`
    pub tri: usize,
    /// Neighbors `k` of `i` (not adjacent to `j`) closing a 4-cycle through `j`.
    pub sq_i: usize,
    pub sq_j: usize,
    /// Largest number of completing nodes seen from a single `k`.
    pub gamma_max: usize,
}

fn contains(sorted: &[usize], x: usize) -> bool {
    sorted.binary_search(&x).is_ok()
}

fn intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut p, mut q, mut c) = (0, 0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                p += 1;
                q += 1;
            }
        }
    }
    c
}

/// One side of the square count: returns `(|□^a(a, b)|, max completions)`.
fn squares_from(g: &SparseGraph, a: usize, b: usize) -> (usize, usize) {
    let na = g.neighbors(a);
    let nb = g.neighbors(b);
    let mut count = 0;
    let mut gamma = 0;
    for &k in na {
        if k == a || k == b || contains(nb, k) {
            continue;
        }
        // completing nodes w ∈ (N(k) ∩ N(b)) \ N(a), w ∉ {a, b}
        let nk = g.neighbors(k);
        let (mut p, mut q, mut c) = (0, 0, 0);
        while p < nk.len() && q < nb.len() {
            match nk[p].cmp(&nb[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    let w = nk[p];
                    if w != a && w != b && !contains(na, w) {
                        c += 1;
                    }
                    p += 1;
                    q += 1;
                }
            }
        }
        if c > 0 {
            count += 1;
            gamma = gamma.max(c);
        }
    }
    (count, gamma)
}

fn check_pair(g: &SparseGraph, i: usize, j: usize) -> Result<()> {
    let n = g.len();
    if i >= n || j >= n {
        return Err(Error::param(format!("pair ({i}, {j}) out of range for {n} nodes")));
    }
    if i == j {
        return Err(Error::param(format!("curvature needs two distinct nodes, got ({i}, {i})")));
    }
    for v in [i, j] {
        if g.degree(v) == 0 {
            return Err(Error::Domain(format!("curvature undefined: node {v} is isolated")));
        }
    }
    Ok(())
}

pub fn neighborhood_stats(g: &SparseGraph, i: usize, j: usize) -> Result<NeighborhoodStats> {
    check_pair(g, i, j)?;
    Ok(stats_unchecked(g, i, j))
}

fn stats_unchecked(g: &SparseGraph, i: usize, j: usize) -> NeighborhoodStats {
    let tri = intersection_count(g.neighbors(i), g.neighbors(j));
    let (sq_i, gi) = squares_from(g, i, j);
    let (sq_j, gj) = squares_from(g, j, i);
    NeighborhoodStats {
        tri,
        sq_i,
        sq_j,
        gamma_max: gi.max(gj),
    }
}

/// Assembles the curvature from degrees and counts. Symmetric in the two
/// endpoints bit for bit: every term is ordered by (min degree, max degree).
pub fn bfc_from_stats(d_i: usize, d_j: usize, s: &NeighborhoodStats) -> f64 {
    let lo = d_i.min(d_j) as f64;
    let hi = d_i.max(d_j) as f64;
    let tri = s.tri as f64;
    let mut ric = -2.0 + 2.0 / lo + 2.0 / hi + 2.0 * tri / hi + tri / lo;
    if s.gamma_max > 0 {
        ric += ((s.sq_i + s.sq_j) as f64) / (s.gamma_max as f64 * hi);
    }
    ric
}

/// Balanced Forman Curvature `Ric(i, j)`, always `>= -2`.
pub fn bfc_pair(g: &SparseGraph, i: usize, j: usize) -> Result<f64> {
    let s = neighborhood_stats(g, i, j)?;
    Ok(bfc_from_stats(g.degree(i), g.degree(j), &s))
}

fn bfc_unchecked(g: &SparseGraph, i: usize, j: usize) -> f64 {
    bfc_from_stats(g.degree(i), g.degree(j), &stats_unchecked(g, i, j))
}

/// Running `max_j Ric(i, j)` per node over an append-only labeled list.
///
/// Each node remembers how much of the labeled list it has already absorbed,
/// so a query only evaluates pairs against labeled nodes added since the last
/// time that node was a candidate.
#[derive(Debug, Clone)]
pub struct MinimaxCache {
    running_max: Vec<f64>,
    consumed: Vec<usize>,
}

impl MinimaxCache {
    pub fn new(n: usize) -> Self {
        MinimaxCache {
            running_max: vec![f64::NEG_INFINITY; n],
            consumed: vec![0; n],
        }
    }

    /// Current running maximum for `node` (`-inf` before any update).
    pub fn value(&self, node: usize) -> f64 {
        self.running_max[node]
    }
}

/// `argmin_{i ∈ candidates} max_{j ∈ labeled} Ric(i, j)`, ties to the lowest
/// node index. `labeled` must only ever grow by appending between calls that
/// share `cache`.
pub fn bfc_minimax(
    g: &SparseGraph,
    candidates: &[usize],
    labeled: &[usize],
    cache: &mut MinimaxCache,
) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::State("no candidates left for the minimax search".into()));
    }
    if labeled.is_empty() {
        return Err(Error::State("minimax search needs at least one labeled node".into()));
    }
    let n = g.len();
    let mut is_labeled = vec![false; n];
    for &j in labeled {
        if j >= n {
            return Err(Error::param(format!("labeled node {j} out of range")));
        }
        if g.degree(j) == 0 {
            return Err(Error::Domain(format!("curvature undefined: node {j} is isolated")));
        }
        is_labeled[j] = true;
    }
    for &c in candidates {
        if c >= n {
            return Err(Error::param(format!("candidate {c} out of range")));
        }
        if is_labeled[c] {
            return Err(Error::State(format!("node {c} is both candidate and labeled")));
        }
        if g.degree(c) == 0 {
            return Err(Error::Domain(format!("curvature undefined: node {c} is isolated")));
        }
    }

    let updated: Vec<f64> = candidates
        .par_iter()
        .map(|&c| {
            labeled[cache.consumed[c]..]
                .iter()
                .fold(cache.running_max[c], |m, &j| m.max(bfc_unchecked(g, c, j)))
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (&c, &v) in candidates.iter().zip(&updated) {
        cache.running_max[c] = v;
        cache.consumed[c] = labeled.len();
        best = match best {
            Some((bc, bv)) if bv < v || (bv == v && bc < c) => Some((bc, bv)),
            _ => Some((c, v)),
        };
    }
    Ok(best.expect("candidates are nonempty"))
}

/// `max_{j ∈ labeled} Ric(node, j)`, skipping `node` itself.
pub fn max_bfc_to_set(g: &SparseGraph, node: usize, labeled: &[usize]) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for &j in labeled.iter().filter(|&&j| j != node) {
        let r = bfc_pair(g, node, j)?;
        best = Some(best.map_or(r, |b| b.max(r)));
    }
    Ok(best)
}

/// The `⌈n / r⌉` highest-degree nodes, ties to the lowest index, returned in
/// ascending index order.
pub fn top_degree_pool(g: &SparseGraph, r: usize) -> Result<Vec<usize>> {
    let all: Vec<usize> = (0..g.len()).collect();
    top_degree_among(g, &all, r)
}

/// As [`top_degree_pool`] but restricted to `nodes`; the pool size is
/// `⌈n / r⌉` (capped at `nodes.len()`) where `n` is the graph size.
pub fn top_degree_among(g: &SparseGraph, nodes: &[usize], r: usize) -> Result<Vec<usize>> {
    if r == 0 {
        return Err(Error::param("reduction factor r must be at least 1"));
    }
    let size = g.len().div_ceil(r).min(nodes.len());
    let mut ranked = nodes.to_vec();
    ranked.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    ranked.truncate(size);
    ranked.sort_unstable();
    Ok(ranked)
}
