use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::active::Acquisition;
use crate::coreset::{DacParams, StopSignal, StoppingConfig};
use crate::data::BlobsParams;
use crate::error::{Error, Result};
use crate::graph::{EdgeLength, Metric};

const CORESET_BENCH: &str = include_str!("presets/coreset-bench.conf");
const REWIRE_BENCH: &str = include_str!("presets/rewire-bench.conf");

/// Names of the presets shipped with the crate.
pub const PRESETS: &[&str] = &["coreset-bench", "rewire-bench"];

/// Text of a shipped preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    match name {
        "coreset-bench" => Ok(CORESET_BENCH),
        "rewire-bench" => Ok(REWIRE_BENCH),
        _ => Err(Error::Config(format!(
            "unknown preset '{name}' (available: {})",
            PRESETS.join(", ")
        ))),
    }
}

/// Flat `key = value` document. Later assignments win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            map.set(k, v.trim());
        }
        Ok(map)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn merge(&mut self, other: &ConfigMap) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    /// Applies `--key value` pairs.
    pub fn apply_flags(&mut self, args: &[String]) -> Result<()> {
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("expected a --key flag, got '{flag}'")))?;
            if let Some((k, v)) = key.split_once('=') {
                self.set(k, v);
                continue;
            }
            let value = it
                .next()
                .ok_or_else(|| Error::Config(format!("flag --{key} needs a value")))?;
            self.set(key, value);
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetKind {
    Blobs {
        points_per_cluster: usize,
        clusters: usize,
        sigma: f64,
        classes: usize,
        seed: u64,
    },
    Box {
        side: usize,
        boundary: f64,
    },
    File {
        points: PathBuf,
        labels: PathBuf,
        classes: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    /// Relabel as `label mod m` after loading.
    pub modulo: Option<usize>,
}

impl DatasetSpec {
    pub fn blobs(p: &BlobsParams) -> Self {
        DatasetSpec {
            kind: DatasetKind::Blobs {
                points_per_cluster: p.points_per_cluster,
                clusters: p.clusters,
                sigma: p.sigma,
                classes: p.classes,
                seed: p.seed,
            },
            modulo: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoresetMethod {
    Cc,
    Dac,
    Random,
    PerClass,
}

impl FromStr for CoresetMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cc" | "curvature" => Ok(CoresetMethod::Cc),
            "dac" => Ok(CoresetMethod::Dac),
            "random" => Ok(CoresetMethod::Random),
            "per-class" => Ok(CoresetMethod::PerClass),
            _ => Err(Error::Config(format!("unknown coreset method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetSpec {
    pub method: CoresetMethod,
    /// Size for cc and random; ignored by dac and per-class.
    pub budget: usize,
    pub stopping: Option<StoppingConfig>,
    pub reduction: Option<usize>,
    pub dac: DacParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Fixed,
    Decay,
    Curvature,
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(ScheduleKind::Fixed),
            "decay" => Ok(ScheduleKind::Decay),
            "curvature" => Ok(ScheduleKind::Curvature),
            _ => Err(Error::Config(format!("unknown tau schedule '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Laplace,
    Pwll,
    Hypergraph,
    Rewired,
    RandomRewired,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Laplace => "laplace",
            ClassifierKind::Pwll => "pwll",
            ClassifierKind::Hypergraph => "hypergraph",
            ClassifierKind::Rewired => "rewired",
            ClassifierKind::RandomRewired => "random-rewired",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace" => Ok(ClassifierKind::Laplace),
            "pwll" => Ok(ClassifierKind::Pwll),
            "hypergraph" => Ok(ClassifierKind::Hypergraph),
            "rewired" => Ok(ClassifierKind::Rewired),
            "random-rewired" => Ok(ClassifierKind::RandomRewired),
            _ => Err(Error::Config(format!("unknown classifier '{s}'"))),
        }
    }
}

/// Scales beyond the base graph, shared by the hypergraph and rewired
/// classifiers. Entry 0 of `powers` and `weights` belongs to the base graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiscaleSpec {
    pub fine_k: Vec<usize>,
    pub powers: Vec<u32>,
    pub weights: Vec<f64>,
    pub materialize_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub k: usize,
    pub metric: Metric,
    pub coreset: CoresetSpec,
    /// One run per entry, all sharing the graph, coresets and seeds.
    pub classifiers: Vec<ClassifierKind>,
    pub tau0: f64,
    pub schedule: ScheduleKind,
    pub multiscale: MultiscaleSpec,
    pub acquisition: Acquisition,
    pub al_budget: usize,
    pub trials: usize,
    pub base_seed: u64,
    /// Write measured wall times; when false the column is zeroed so output
    /// files are reproducible byte for byte.
    pub timing: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "dataset.kind",
    "dataset.points_per_cluster",
    "dataset.clusters",
    "dataset.sigma",
    "dataset.classes",
    "dataset.seed",
    "dataset.side",
    "dataset.boundary",
    "dataset.points",
    "dataset.labels",
    "dataset.modulo",
    "graph.k",
    "graph.metric",
    "coreset.method",
    "coreset.budget",
    "coreset.stopping",
    "coreset.window",
    "coreset.z_thresh",
    "coreset.signal",
    "coreset.reduction",
    "coreset.dac_inner",
    "coreset.dac_outer",
    "coreset.edge_length",
    "classifier",
    "classifier.tau0",
    "classifier.schedule",
    "multiscale.fine_k",
    "multiscale.powers",
    "multiscale.weights",
    "multiscale.materialize_cap",
    "acquisition",
    "al.budget",
    "trials",
    "seed",
    "output.timing",
];

struct Reader<'a>(&'a ConfigMap);

impl Reader<'_> {
    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.0.get(key) {
            Some(v) => parse_value(key, v),
            None => Ok(default),
        }
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            Some("") | Some("none") | None => Ok(None),
            Some(v) => parse_value(key, v).map(Some),
        }
    }

    fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.0.get(key) {
            Some(v) => parse_list(key, v),
            None => Ok(default),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.0.get(key) {
            Some(v) => parse_bool(key, v),
            None => Ok(default),
        }
    }

    fn path(&self, key: &str) -> Result<PathBuf> {
        self.0
            .get(key)
            .map(PathBuf::from)
            .ok_or_else(|| Error::Config(format!("{key} is required")))
    }
}

impl ExperimentConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        let r = Reader(map);
        let seed: u64 = r.or("seed", 0)?;
        let blobs = BlobsParams::default();
        let kind = match r.or("dataset.kind", "blobs".to_string())?.as_str() {
            "blobs" => DatasetKind::Blobs {
                points_per_cluster: r.or("dataset.points_per_cluster", blobs.points_per_cluster)?,
                clusters: r.or("dataset.clusters", blobs.clusters)?,
                sigma: r.or("dataset.sigma", blobs.sigma)?,
                classes: r.or("dataset.classes", blobs.classes)?,
                seed: r.or("dataset.seed", seed)?,
            },
            "box" => DatasetKind::Box {
                side: r.or("dataset.side", 65)?,
                boundary: r.or("dataset.boundary", 0.3)?,
            },
            "file" => DatasetKind::File {
                points: r.path("dataset.points")?,
                labels: r.path("dataset.labels")?,
                classes: r.opt("dataset.classes")?,
            },
            other => return Err(Error::Config(format!("unknown dataset kind '{other}'"))),
        };
        let dataset = DatasetSpec {
            kind,
            modulo: r.opt("dataset.modulo")?,
        };

        let stopping = if r.flag("coreset.stopping", false)? {
            let signal = match r.or("coreset.signal", "differences".to_string())?.as_str() {
                "differences" => StopSignal::Differences,
                "raw" => StopSignal::Raw,
                other => return Err(Error::Config(format!("unknown stop signal '{other}'"))),
            };
            let cfg = StoppingConfig {
                window: r.or("coreset.window", 20)?,
                z_thresh: r.or("coreset.z_thresh", 3.0)?,
                signal,
            };
            cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
            Some(cfg)
        } else {
            None
        };
        let coreset = CoresetSpec {
            method: r.or("coreset.method", CoresetMethod::Cc)?,
            budget: r.or("coreset.budget", 10)?,
            stopping,
            reduction: r.opt("coreset.reduction")?,
            dac: DacParams {
                r_inner: r.or("coreset.dac_inner", 2.0)?,
                r_outer: r.or("coreset.dac_outer", 3.0)?,
                edge_length: r.or("coreset.edge_length", EdgeLength::Unit)?,
            },
        };

        let classifiers: Vec<ClassifierKind> = r.list("classifier", vec![ClassifierKind::Laplace])?;
        let mut seen = Vec::new();
        for c in &classifiers {
            if seen.contains(c) {
                return Err(Error::Config(format!("classifier '{}' listed twice", c.name())));
            }
            seen.push(*c);
        }

        let multiscale = MultiscaleSpec {
            fine_k: r.list("multiscale.fine_k", vec![30])?,
            powers: r.list("multiscale.powers", vec![1, 2])?,
            weights: r.list("multiscale.weights", vec![1.0, 4.0])?,
            materialize_cap: r.or("multiscale.materialize_cap", crate::ssl::DEFAULT_MATERIALIZE_CAP)?,
        };

        let cfg = ExperimentConfig {
            dataset,
            k: r.or("graph.k", 25)?,
            metric: r.or("graph.metric", Metric::Angular)?,
            coreset,
            classifiers,
            tau0: r.or("classifier.tau0", 0.1)?,
            schedule: r.or("classifier.schedule", ScheduleKind::Curvature)?,
            multiscale,
            acquisition: r.or("acquisition", Acquisition::Margin)?,
            al_budget: r.or("al.budget", 50)?,
            trials: r.or("trials", 10)?,
            base_seed: seed,
            timing: r.flag("output.timing", true)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config document with `--key value` overrides on top.
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let mut map = ConfigMap::parse(text)?;
        map.apply_flags(overrides)?;
        Self::from_map(&map)
    }

    pub fn preset(name: &str, overrides: &[String]) -> Result<Self> {
        Self::from_text(preset_text(name)?, overrides)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return bad("graph.k must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.classifiers.is_empty() {
            return bad("no classifier given".into());
        }
        if !(self.tau0 >= 0.0 && self.tau0.is_finite()) {
            return bad(format!("classifier.tau0 must be nonnegative, got {}", self.tau0));
        }
        let m = &self.multiscale;
        if m.powers.len() != m.fine_k.len() + 1 || m.weights.len() != m.fine_k.len() + 1 {
            return bad(format!(
                "multiscale needs one power and weight per scale: {} fine scales, {} powers, {} weights",
                m.fine_k.len(),
                m.powers.len(),
                m.weights.len()
            ));
        }
        if m.fine_k.iter().any(|&fk| fk == 0) {
            return bad("multiscale.fine_k entries must be positive".into());
        }
        if let DatasetKind::Box { side, .. } = self.dataset.kind {
            if side < 2 {
                return bad("dataset.side must be at least 2".into());
            }
        }
        if self.coreset.method == CoresetMethod::Dac {
            let d = &self.coreset.dac;
            if !(d.r_inner > 0.0 && d.r_inner < d.r_outer) {
                return bad("DAC radii need 0 < coreset.dac_inner < coreset.dac_outer".into());
            }
        }
        Ok(())
    }
}
