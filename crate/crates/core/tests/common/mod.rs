#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topoal::graph::SparseGraph;
use topoal::ssl::LabelMatrix;

/// Erdős–Rényi edges on `n` nodes with edge probability `p`.
pub fn random_edges(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                e.push((i, j));
            }
        }
    }
    e
}

/// Random connected graph: a random spanning tree plus extra random edges,
/// with weights in (0.1, 1].
pub fn random_connected(n: usize, extra: f64, seed: u64) -> SparseGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        set.insert((u, v));
    }
    for (i, j) in random_edges(n, extra, seed ^ 0x5eed) {
        set.insert((i, j));
    }
    let edges: Vec<(usize, usize, f64)> = set.into_iter().map(|(i, j)| (i, j, 0.1 + 0.9 * rng.gen::<f64>())).collect();
    SparseGraph::from_edges(n, &edges).unwrap()
}

pub fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Brute-force curvature built from explicit neighbor sets.
pub struct Oracle {
    adj: Vec<BTreeSet<usize>>,
}

impl Oracle {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![BTreeSet::new(); n];
        for &(i, j) in edges {
            adj[i].insert(j);
            adj[j].insert(i);
        }
        Oracle { adj }
    }

    /// Nodes `k` adjacent to `a` but not `b` (and not an endpoint) together
    /// with their completing nodes `w`.
    fn square_witnesses(&self, a: usize, b: usize) -> Vec<BTreeSet<usize>> {
        let mut out = Vec::new();
        for &k in &self.adj[a] {
            if k == a || k == b || self.adj[b].contains(&k) {
                continue;
            }
            let ws: BTreeSet<usize> = self.adj[k]
                .intersection(&self.adj[b])
                .copied()
                .filter(|w| !self.adj[a].contains(w) && *w != a && *w != b)
                .collect();
            if !ws.is_empty() {
                out.push(ws);
            }
        }
        out
    }

    pub fn stats(&self, i: usize, j: usize) -> (usize, usize, usize, usize) {
        let tri = self.adj[i].intersection(&self.adj[j]).count();
        let si = self.square_witnesses(i, j);
        let sj = self.square_witnesses(j, i);
        let gamma = si.iter().chain(&sj).map(BTreeSet::len).max().unwrap_or(0);
        (tri, si.len(), sj.len(), gamma)
    }

    pub fn ric(&self, i: usize, j: usize) -> f64 {
        let di = self.adj[i].len() as f64;
        let dj = self.adj[j].len() as f64;
        let (tri, si, sj, gamma) = self.stats(i, j);
        let hi = di.max(dj);
        let lo = di.min(dj);
        let mut r = -2.0 + 2.0 / di + 2.0 / dj + 2.0 * tri as f64 / hi + tri as f64 / lo;
        if gamma > 0 {
            r += (si + sj) as f64 / (gamma as f64 * hi);
        }
        r
    }
}

/// Edges of the `side × side` torus grid.
pub fn torus(side: usize) -> Vec<(usize, usize)> {
    let id = |r: usize, c: usize| (r % side) * side + c % side;
    let mut e = Vec::new();
    for r in 0..side {
        for c in 0..side {
            e.push((id(r, c), id(r, c + 1)));
            e.push((id(r, c), id(r + 1, c)));
        }
    }
    e
}

/// Labels `per_class` distinct random nodes for each of `classes` classes.
pub fn random_labels(n: usize, classes: usize, per_class: usize, seed: u64) -> LabelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        nodes.swap(i, rng.gen_range(0..=i));
    }
    let pairs: Vec<(usize, usize)> = (0..classes * per_class).map(|t| (nodes[t], t % classes)).collect();
    LabelMatrix::new(n, classes, &pairs).unwrap()
}
