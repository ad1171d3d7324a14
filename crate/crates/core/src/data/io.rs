//! Plain-text (and little-endian f32 binary) embedding files.
//!
//! Points: first line `n d`, then `n` lines of `d` whitespace-separated floats.
//! The binary variant keeps the same text header line followed by `n * d`
//! little-endian `f32` values; it is selected by a `.bin` extension.
//! Labels: `n` lines, one base-10 integer each.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::Dataset;
use crate::error::{Error, Result};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message: message.into(),
    }
}

fn parse_header(path: &Path, line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| parse_err(path, 1, "missing `n d` header"))?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(path, 1, format!("expected `n d`, found {line:?}")));
    }
    let n = fields[0]
        .parse::<usize>()
        .map_err(|e| parse_err(path, 1, format!("bad row count: {e}")))?;
    let d = fields[1]
        .parse::<usize>()
        .map_err(|e| parse_err(path, 1, format!("bad dimension: {e}")))?;
    if n == 0 || d == 0 {
        return Err(parse_err(path, 1, "row count and dimension must be positive"));
    }
    Ok((n, d))
}

/// Returns `(row-major points, dim)`.
pub fn load_points(path: impl AsRef<Path>) -> Result<(Vec<f64>, usize)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "bin") {
        return parse_binary(path, &bytes);
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| parse_err(path, 0, format!("not UTF-8: {e}")))?;
    let mut lines = text.lines();
    let (n, d) = parse_header(path, lines.next())?;
    let mut points = Vec::with_capacity(n * d);
    let mut rows = 0usize;
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        if line.trim().is_empty() {
            continue;
        }
        if rows == n {
            return Err(parse_err(path, lineno, format!("more than the declared {n} rows")));
        }
        let before = points.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| parse_err(path, lineno, format!("bad float {tok:?}: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, lineno, format!("non-finite value {tok:?}")));
            }
            points.push(v);
        }
        if points.len() - before != d {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {d} values, found {}", points.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(path, rows + 1, format!("declared {n} rows, found {rows}")));
    }
    Ok((points, d))
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<(Vec<f64>, usize)> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| parse_err(path, 1, "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| parse_err(path, 1, "header is not UTF-8"))?;
    let (n, d) = parse_header(path, Some(header))?;
    let body = &bytes[nl + 1..];
    if body.len() != 4 * n * d {
        return Err(parse_err(
            path,
            2,
            format!("expected {} bytes of f32 data, found {}", 4 * n * d, body.len()),
        ));
    }
    let mut points = Vec::with_capacity(n * d);
    for (k, chunk) in body.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(parse_err(path, 2, format!("non-finite value in row {}", k / d)));
        }
        points.push(f64::from(v));
    }
    Ok((points, d))
}

pub fn load_labels(path: impl AsRef<Path>, expected: usize) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::with_capacity(expected);
    for (offset, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = t
            .parse::<usize>()
            .map_err(|e| parse_err(path, offset + 1, format!("bad label {t:?}: {e}")))?;
        labels.push(v);
    }
    if labels.len() != expected {
        return Err(parse_err(
            path,
            labels.len(),
            format!("expected {expected} labels, found {}", labels.len()),
        ));
    }
    Ok(labels)
}

/// Loads points plus optional labels. When `classes` is given every label must be below it.
pub fn load_embeddings(
    points_path: impl AsRef<Path>,
    labels_path: Option<&Path>,
    classes: Option<usize>,
) -> Result<Dataset> {
    let (points, dim) = load_points(points_path)?;
    let n = points.len() / dim;
    let labels = labels_path.map(|p| load_labels(p, n)).transpose()?;
    let ds = Dataset::new(points, dim, labels)?;
    match classes {
        Some(k) => ds.with_classes(k),
        None => Ok(ds),
    }
}

pub fn save_points(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "{} {}", data.len(), data.dim())?;
        for i in 0..data.len() {
            let row: Vec<String> = data.point(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn save_points_binary(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut buf = format!("{} {}\n", data.len(), data.dim()).into_bytes();
    for &v in data.points() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(labels.len() * 2);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
