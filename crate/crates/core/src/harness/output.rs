use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentOutput, RunRecord, TrialFailure};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "trial,iteration,labels,accuracy,acq_value,tau,curvature,wall_ms";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_text(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.trial,
            r.iteration,
            r.labels,
            r.accuracy,
            opt(r.acq_value),
            r.tau,
            opt(r.curvature),
            r.wall_ms
        );
    }
    s
}

pub fn write_csv(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, csv_text(records)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(perr(1, format!("expected header '{CSV_HEADER}'")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(perr(lineno, format!("expected 8 fields, found {}", f.len())));
        }
        let num = |k: usize| -> Result<f64> {
            f[k].parse::<f64>()
                .map_err(|_| perr(lineno, format!("bad number '{}'", f[k])))
        };
        let int = |k: usize| -> Result<usize> {
            f[k].parse::<usize>()
                .map_err(|_| perr(lineno, format!("bad integer '{}'", f[k])))
        };
        let maybe = |k: usize| -> Result<Option<f64>> {
            if f[k].is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        out.push(RunRecord {
            trial: int(0)?,
            iteration: int(1)?,
            labels: int(2)?,
            accuracy: num(3)?,
            acq_value: maybe(4)?,
            tau: num(5)?,
            curvature: maybe(6)?,
            wall_ms: num(7)?,
        });
    }
    Ok(out)
}

/// Accuracy across trials at one label count. `std` is the population
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStat {
    pub labels: usize,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub completed: usize,
    pub incomplete: Vec<TrialFailure>,
    pub total_wall_ms: f64,
    pub curve: Vec<LabelStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub methods: Vec<MethodSummary>,
    pub coverage: Option<Vec<f64>>,
}

/// Groups records by label count.
pub fn summarize(records: &[RunRecord]) -> Vec<LabelStat> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.labels).or_default().push(r.accuracy);
    }
    groups
        .into_iter()
        .map(|(labels, acc)| {
            let n = acc.len() as f64;
            let mean = acc.iter().sum::<f64>() / n;
            let var = acc.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
            LabelStat {
                labels,
                count: acc.len(),
                mean,
                std: var.sqrt(),
            }
        })
        .collect()
}

fn completed_trials(records: &[RunRecord]) -> usize {
    let mut t: Vec<usize> = records.iter().map(|r| r.trial).collect();
    t.dedup();
    t.len()
}

pub fn summary_of(out: &ExperimentOutput) -> Summary {
    Summary {
        methods: out
            .methods
            .iter()
            .map(|m| MethodSummary {
                method: m.method.clone(),
                completed: completed_trials(&m.records),
                incomplete: m.failures.clone(),
                total_wall_ms: m.records.iter().map(|r| r.wall_ms).sum(),
                curve: summarize(&m.records),
            })
            .collect(),
        coverage: out.coverage.clone(),
    }
}

/// Writes `<method>.csv` per classifier and `summary.json` into `dir`.
pub fn emit_results(out: &ExperimentOutput, dir: impl AsRef<Path>) -> Result<Summary> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for m in &out.methods {
        write_csv(dir.join(format!("{}.csv", m.method)), &m.records)?;
    }
    let summary = summary_of(out);
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

/// Plain-text table of every CSV in `dir`: mean and std accuracy per label
/// count, plus total wall time.
pub fn report(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!("no CSV files in {}", dir.display())));
    }
    let mut s = String::new();
    for f in files {
        let records = read_csv(&f)?;
        let name = f.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
        let wall: f64 = records.iter().map(|r| r.wall_ms).sum();
        let _ = writeln!(s, "{name}: {} trials, {:.1} ms", completed_trials(&records), wall);
        let _ = writeln!(s, "  labels  trials  mean     std");
        for st in summarize(&records) {
            let _ = writeln!(s, "  {:>6}  {:>6}  {:.4}  {:.4}", st.labels, st.count, st.mean, st.std);
        }
    }
    Ok(s)
}
