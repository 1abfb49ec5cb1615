use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use modq::analysis::{self, AnalysisConfig, InputMode};
use modq::evolution::{RankKey, SortOrder};
use modq::export::{export_graph, ExportFormat};
use modq::synth::PlantedPartitionSpec;
use modq::{largest_connected_component, modularity_q, Error, Execution, GraphMode};

#[derive(Parser)]
#[command(
    name = "modq",
    about = "Package modularity (Q) of class dependency networks"
)]
struct Cli {
    /// Disable data-parallel evaluation.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every snapshot of a project and summarize the Q trajectory.
    Analyze(AnalyzeArgs),
    /// Rank projects by their Q change statistics.
    Rank(RankArgs),
    /// Write one snapshot as GraphML or DOT.
    Export(ExportArgs),
    /// Generate a planted-partition snapshot.
    Synth(SynthArgs),
    /// Print the tool version.
    Version,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Snapshot directory (edgelist/source) or dated edge file (temporal).
    #[arg(long)]
    snapshots: PathBuf,
    /// Input format: edgelist, source or temporal.
    #[arg(long, default_value = "edgelist")]
    format: InputMode,
    /// Comma-separated cut dates for temporal input.
    #[arg(long, value_delimiter = ',')]
    cuts: Vec<NaiveDate>,
    /// directed or undirected.
    #[arg(long, default_value = "directed")]
    mode: GraphMode,
    /// Score the largest weakly connected component only.
    #[arg(long)]
    lcc: bool,
    /// Truncate package names to this many segments.
    #[arg(long)]
    depth: Option<NonZeroUsize>,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV series path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for per-snapshot GraphML files.
    #[arg(long)]
    graphml: Option<PathBuf>,
    #[arg(long)]
    project: Option<String>,
}

#[derive(Args)]
struct RankArgs {
    /// Report files written by `modq analyze`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// mean or std.
    #[arg(long, default_value = "mean")]
    key: RankKey,
    /// asc or desc.
    #[arg(long, default_value = "asc")]
    order: SortOrder,
    #[arg(long, default_value_t = 4)]
    groups: usize,
    /// Ranking CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Group composition CSV path (stdout when omitted).
    #[arg(long)]
    groups_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Edge-list file, snapshot directory with edges.tsv, or source tree.
    #[arg(long)]
    snapshots: PathBuf,
    /// graphml or dot.
    #[arg(long, default_value = "graphml")]
    format: ExportFormat,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    lcc: bool,
    #[arg(long)]
    depth: Option<NonZeroUsize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of modules.
    #[arg(long)]
    modules: usize,
    /// Nodes per module.
    #[arg(long)]
    size: usize,
    #[arg(long)]
    p_in: f64,
    #[arg(long)]
    p_out: f64,
    #[arg(long)]
    undirected: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output snapshot directory.
    #[arg(long)]
    out: PathBuf,
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Analyze(a) => {
            let config = AnalysisConfig {
                input: a.format,
                snapshots: a.snapshots,
                cuts: a.cuts,
                mode: a.mode,
                lcc: a.lcc,
                depth: a.depth,
                json_out: a.out,
                csv_out: a.csv,
                graphml_dir: a.graphml,
                project: a.project,
            };
            let report = analysis::run_analyze(&config, exec)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if config.json_out.is_none() {
                print!("{}", report.to_json()?);
            }
        }
        Command::Rank(r) => {
            let out = analysis::run_rank(&r.reports, r.key, r.order, r.groups)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            write_or_print(r.out.as_deref(), &out.ranking_csv())?;
            if let Some(groups) = out.groups_csv() {
                write_or_print(r.groups_csv.as_deref(), &groups)?;
            }
        }
        Command::Export(e) => {
            let (graph, partition) = analysis::load_snapshot(&e.snapshots, e.depth, exec)?;
            let graph = if e.lcc {
                largest_connected_component(&graph)
            } else {
                graph
            };
            export_graph(&graph, &partition, e.format, &e.out)?;
        }
        Command::Synth(s) => {
            let spec = PlantedPartitionSpec {
                k: s.modules,
                s: s.size,
                p_in: s.p_in,
                p_out: s.p_out,
                directed: !s.undirected,
                seed: s.seed,
            };
            let (graph, partition) = analysis::run_synth(&spec, &s.out)?;
            let mode = if s.undirected {
                GraphMode::Undirected
            } else {
                GraphMode::Directed
            };
            let score = modularity_q(&graph, &partition, mode)?;
            println!(
                "nodes={} edges={} q={} degenerate={}",
                graph.node_count(),
                graph.edge_count(),
                modq::formats::fixed6(score.q),
                score.degenerate
            );
        }
        Command::Version => println!("{} {}", analysis::TOOL_NAME, analysis::VERSION),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
