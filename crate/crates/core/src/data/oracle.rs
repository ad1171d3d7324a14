/// Ground-truth labels with a query counter.
#[derive(Debug, Clone)]
pub struct OracleHandle {
    labels: Vec<usize>,
    queries: usize,
}

impl OracleHandle {
    pub fn new(labels: Vec<usize>) -> Self {
        OracleHandle { labels, queries: 0 }
    }

    pub fn query(&mut self, node: usize) -> usize {
        self.queries += 1;
        self.labels[node]
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    /// Read-only access for evaluation; does not count as a query.
    pub fn ground_truth(&self) -> &[usize] {
        &self.labels
    }
}
