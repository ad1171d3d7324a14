use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use topoal::curvature::bfc_pair;
use topoal::data::load_embeddings;
use topoal::graph::{build_knn_graph, read_graph, write_graph, Metric};
use topoal::harness::{
    build_coreset, emit_results, load_dataset, report, run_experiment, ConfigMap, ExperimentConfig,
};
use topoal::Error;

/// Topology-aware active learning on kNN similarity graphs.
///
/// Set TOPOAL_WORKERS to bound the number of worker threads.
#[derive(Parser)]
#[command(name = "topoal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graph construction.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Coreset selection alone.
    #[command(subcommand)]
    Coreset(CoresetCmd),
    /// Active learning experiments.
    #[command(subcommand)]
    Al(AlCmd),
    /// Run a shipped preset (coreset-bench, rewire-bench).
    Bench {
        preset: String,
        /// Output directory for CSV and summary files.
        #[arg(long)]
        out: PathBuf,
        /// `--key value` pairs overriding preset keys.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Curvature queries.
    #[command(subcommand)]
    Bfc(BfcCmd),
    /// Summarize the CSV files of a results directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Build a kNN graph from a points file.
    Build {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 25)]
        k: usize,
        #[arg(long, default_value = "angular")]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `--key value` pairs overriding file keys.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> topoal::Result<ExperimentConfig> {
        let mut map = match &self.config {
            Some(p) => ConfigMap::load(p)?,
            None => ConfigMap::default(),
        };
        map.apply_flags(&self.overrides)?;
        ExperimentConfig::from_map(&map)
    }
}

#[derive(Subcommand)]
enum CoresetCmd {
    /// Print the coreset of every trial as JSON.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum AlCmd {
    Run {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum BfcCmd {
    /// Curvature between two nodes of a graph file.
    Pair {
        #[arg(long)]
        graph: PathBuf,
        i: usize,
        j: usize,
    },
}

fn experiment(cfg: &ExperimentConfig, out: &PathBuf) -> topoal::Result<()> {
    let result = run_experiment(cfg)?;
    let summary = emit_results(&result, out)?;
    for m in &summary.methods {
        let last = m.curve.last();
        println!(
            "{}: {} trials completed, {} failed, final accuracy {:.4} at {} labels",
            m.method,
            m.completed,
            m.incomplete.len(),
            last.map_or(f64::NAN, |s| s.mean),
            last.map_or(0, |s| s.labels)
        );
    }
    if summary.methods.iter().any(|m| !m.incomplete.is_empty()) {
        return Err(Error::State("some trials did not complete".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> topoal::Result<()> {
    match cli.command {
        Command::Graph(GraphCmd::Build { points, k, metric, out }) => {
            let data = load_embeddings(&points, None, None)?;
            let g = build_knn_graph(&data, k, metric)?;
            write_graph(&out, &g)?;
            println!("{} nodes, {} edges", g.len(), g.edge_count());
        }
        Command::Coreset(CoresetCmd::Run { cfg }) => {
            let cfg = cfg.load()?;
            let data = load_dataset(&cfg.dataset)?;
            let g = build_knn_graph(&data, cfg.k, cfg.metric)?;
            for t in 0..cfg.trials {
                let c = build_coreset(&cfg.coreset, &g, &data, cfg.base_seed + t as u64)?;
                println!("{}", c.to_json());
            }
        }
        Command::Al(AlCmd::Run { out, cfg }) => experiment(&cfg.load()?, &out)?,
        Command::Bench { preset, out, overrides } => {
            let cfg = ExperimentConfig::preset(&preset, &overrides)?;
            info!("running preset {preset}");
            experiment(&cfg, &out)?;
        }
        Command::Bfc(BfcCmd::Pair { graph, i, j }) => {
            let g = read_graph(&graph)?;
            println!("{}", bfc_pair(&g, i, j)?);
        }
        Command::Report { dir } => print!("{}", report(&dir)?),
    }
    Ok(())
}

fn init_workers() -> Result<(), String> {
    let Ok(v) = std::env::var("TOPOAL_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("TOPOAL_WORKERS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = init_workers() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
