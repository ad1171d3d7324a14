//! Text graph format: header `n nnz`, then one `i j w` line per stored
//! upper-triangular entry (`i < j`, 0-based).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::SparseGraph;
use crate::error::{Error, Result};

pub fn write_graph(path: impl AsRef<Path>, g: &SparseGraph) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{} {}", g.len(), g.edge_count())?;
        for (i, j, v) in g.weights().iter() {
            if i < j {
                // `{}` prints the shortest representation that parses back exactly
                writeln!(w, "{i} {j} {v}")?;
            }
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<SparseGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing `n nnz` header".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 2 {
        return Err(err(1, format!("expected `n nnz`, found {header:?}")));
    }
    let n: usize = h[0].parse().map_err(|e| err(1, format!("bad node count: {e}")))?;
    let nnz: usize = h[1].parse().map_err(|e| err(1, format!("bad entry count: {e}")))?;
    let mut edges = Vec::with_capacity(nnz);
    for (offset, line) in lines {
        let lineno = offset + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(lineno, format!("expected `i j w`, found {line:?}")));
        }
        let i: usize = f[0].parse().map_err(|e| err(lineno, format!("bad index: {e}")))?;
        let j: usize = f[1].parse().map_err(|e| err(lineno, format!("bad index: {e}")))?;
        let w: f64 = f[2].parse().map_err(|e| err(lineno, format!("bad weight: {e}")))?;
        if i >= j || j >= n {
            return Err(err(lineno, format!("entry ({i}, {j}) is not upper-triangular in 0..{n}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(err(lineno, format!("weight {w} must be positive and finite")));
        }
        edges.push((i, j, w));
    }
    if edges.len() != nnz {
        return Err(err(1, format!("header declares {nnz} entries, found {}", edges.len())));
    }
    let mut sorted = edges.clone();
    sorted.sort_by_key(|&(i, j, _)| (i, j));
    if sorted.windows(2).any(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
        return Err(err(1, "duplicate entry".into()));
    }
    SparseGraph::from_edges(n, &edges)
}
