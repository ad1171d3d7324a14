//! Initial labeled sets chosen from graph topology alone.

mod dac;
mod stopping;

pub use dac::{dac_coreset, DacParams};
pub use stopping::{first_trigger, zscore_stop, StopSignal, StoppingConfig, ZScoreDetector};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{bfc_minimax, top_degree_among, MinimaxCache};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetResult {
    /// Selected nodes in acquisition order.
    pub nodes: Vec<usize>,
    /// Minimax curvature of every acquisition after the first (curvature coreset only).
    #[serde(rename = "history")]
    pub curvature_history: Vec<f64>,
    pub stopped_early: bool,
    /// Position in `nodes` of the acquisition that triggered the stop.
    pub stop_index: Option<usize>,
}

impl CoresetResult {
    fn plain(nodes: Vec<usize>) -> Self {
        CoresetResult {
            nodes,
            curvature_history: Vec::new(),
            stopped_early: false,
            stop_index: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coreset result serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("bad coreset JSON: {e}")))
    }
}

/// Curvature coreset: a uniformly random first node, then repeatedly the
/// candidate whose largest curvature to the current coreset is smallest.
///
/// With `reduction = Some(r)` the candidates are fixed up front to the
/// `⌈n / r⌉` highest-degree nodes. With a stopping rule the loop also ends
/// (keeping the triggering acquisition) once the curvature history jumps.
pub fn curvature_coreset(
    g: &SparseGraph,
    budget: usize,
    reduction: Option<usize>,
    stop: Option<&StoppingConfig>,
    seed: u64,
) -> Result<CoresetResult> {
    let n = g.len();
    if budget == 0 || budget > n {
        return Err(Error::param(format!("coreset budget {budget} must lie in 1..={n}")));
    }
    if let Some(r) = reduction {
        if r == 0 {
            return Err(Error::param("reduction factor r must be at least 1"));
        }
        let cap = n.div_ceil(r) + 1;
        if budget > cap {
            return Err(Error::param(format!(
                "budget {budget} exceeds the reduced pool (at most {cap} nodes for r = {r})"
            )));
        }
    }
    if let Some(cfg) = stop {
        cfg.validate()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..n);
    let mut labeled = vec![first];
    let mut history = Vec::new();
    if budget == 1 {
        return Ok(CoresetResult::plain(labeled));
    }

    let rest: Vec<usize> = (0..n).filter(|&v| v != first).collect();
    let mut pool = match reduction {
        Some(r) => top_degree_among(g, &rest, r)?,
        None => rest,
    };
    let mut cache = MinimaxCache::new(n);
    let mut detector = stop.map(ZScoreDetector::new);
    let mut stop_index = None;

    while labeled.len() < budget {
        let (pick, value) = bfc_minimax(g, &pool, &labeled, &mut cache)?;
        history.push(value);
        labeled.push(pick);
        let pos = pool.binary_search(&pick).expect("pick comes from the pool");
        pool.remove(pos);
        if let Some(det) = detector.as_mut() {
            if det.push(value) {
                stop_index = Some(labeled.len() - 1);
                break;
            }
        }
    }
    Ok(CoresetResult {
        nodes: labeled,
        curvature_history: history,
        stopped_early: stop_index.is_some(),
        stop_index,
    })
}

/// `budget` distinct nodes drawn uniformly without replacement.
pub fn random_coreset(n: usize, budget: usize, seed: u64) -> Result<CoresetResult> {
    if budget > n {
        return Err(Error::param(format!("budget {budget} exceeds node count {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(CoresetResult::plain(index::sample(&mut rng, n, budget).into_vec()))
}

/// One uniformly chosen node per class (classes in increasing order).
pub fn per_class_coreset(labels: &[usize], classes: usize, seed: u64) -> Result<CoresetResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(classes);
    for c in 0..classes {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            return Err(Error::param(format!("class {c} has no members")));
        }
        nodes.push(members[rng.gen_range(0..members.len())]);
    }
    Ok(CoresetResult::plain(nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::path;

    #[test]
    fn budget_one_is_a_single_node() {
        let g = path(10);
        let r = curvature_coreset(&g, 1, None, None, 3).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!(r.curvature_history.is_empty());
        assert!(!r.stopped_early);
    }

    #[test]
    fn budget_checked_before_work() {
        let g = path(10);
        assert!(curvature_coreset(&g, 11, None, None, 0).is_err());
        assert!(curvature_coreset(&g, 0, None, None, 0).is_err());
        // r = 5 leaves ⌈10/5⌉ = 2 candidates plus the first pick
        assert!(curvature_coreset(&g, 4, Some(5), None, 0).is_err());
        assert_eq!(curvature_coreset(&g, 3, Some(5), None, 0).unwrap().nodes.len(), 3);
    }

    #[test]
    fn deterministic_and_distinct() {
        let g = path(30);
        let a = curvature_coreset(&g, 12, None, None, 9).unwrap();
        let b = curvature_coreset(&g, 12, None, None, 9).unwrap();
        assert_eq!(a, b);
        let mut s = a.nodes.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 12);
        assert_eq!(a.curvature_history.len(), 11);
        assert!(a.curvature_history.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn random_coreset_contract() {
        assert!(random_coreset(5, 0, 1).unwrap().nodes.is_empty());
        let mut all = random_coreset(7, 7, 1).unwrap().nodes;
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert_eq!(random_coreset(100, 10, 4).unwrap(), random_coreset(100, 10, 4).unwrap());
        assert!(random_coreset(3, 4, 0).is_err());
    }

    #[test]
    fn json_shape() {
        let r = CoresetResult {
            nodes: vec![3, 1],
            curvature_history: vec![-1.5],
            stopped_early: false,
            stop_index: None,
        };
        assert_eq!(
            r.to_json(),
            r#"{"nodes":[3,1],"history":[-1.5],"stopped_early":false,"stop_index":null}"#
        );
        assert_eq!(CoresetResult::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn per_class_picks_each_class() {
        let labels = [0, 1, 1, 2, 0, 2];
        let r = per_class_coreset(&labels, 3, 5).unwrap();
        let got: Vec<usize> = r.nodes.iter().map(|&i| labels[i]).collect();
        assert_eq!(got, vec![0, 1, 2]);
        assert!(per_class_coreset(&labels, 4, 5).is_err());
    }
}
