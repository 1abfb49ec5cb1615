//! End-to-end pipelines behind the `modq` subcommands.
//!
//! Snapshot directories hold one subdirectory per snapshot, named by ISO
//! date (`2004-08-01/`). Each contains either `edges.tsv` (optionally with a
//! `modules.tsv` next to it) or a Java source tree. A temporal edge list is a
//! single file whose third column dates every dependency; the graph at a cut
//! date holds every edge dated on or before it.

use std::fmt::Write as _;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    delta_stats, group_ranking, q_series, rank_projects, EvolutionError, ProjectStats, RankKey,
    RankedProject, Ranking, Snapshot, SnapshotSeries, SortOrder,
};
use crate::exec::Execution;
use crate::export::{render, ExportFormat};
use crate::extract::extract_snapshot;
use crate::formats::{
    fixed6, format_edge_list, format_modules, parse_date, read_edge_list, read_modules,
};
use crate::graph::{
    build_graph, largest_connected_component, partition_from_names, DependencyGraph,
    ModulePartition,
};
use crate::modularity::GraphMode;
use crate::synth::{planted_partition, PlantedPartitionSpec};

pub const TOOL_NAME: &str = "modq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const EDGES_FILE: &str = "edges.tsv";
pub const MODULES_FILE: &str = "modules.tsv";
pub const CSV_HEADER: &str = "timestamp,nodes,edges,modules,q,degenerate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    /// Date-named directories each holding `edges.tsv`.
    #[default]
    Edgelist,
    /// Date-named directories each holding a source tree.
    Source,
    /// One edge list with a date on every line.
    Temporal,
}

impl std::str::FromStr for InputMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "edgelist" => Ok(InputMode::Edgelist),
            "source" => Ok(InputMode::Source),
            "temporal" => Ok(InputMode::Temporal),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisConfig {
    pub input: InputMode,
    pub snapshots: PathBuf,
    /// Cut dates for temporal input; empty means every distinct date.
    pub cuts: Vec<NaiveDate>,
    pub mode: GraphMode,
    pub lcc: bool,
    pub depth: Option<NonZeroUsize>,
    pub json_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
    pub graphml_dir: Option<PathBuf>,
    pub project: Option<String>,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let outputs: Vec<&PathBuf> = [&self.json_out, &self.csv_out, &self.graphml_dir]
            .into_iter()
            .flatten()
            .collect();
        for (i, a) in outputs.iter().enumerate() {
            if outputs[i + 1..].contains(a) {
                return Err(Error::Config(format!(
                    "output path {} given more than once",
                    a.display()
                )));
            }
        }
        if !self.cuts.is_empty() && self.input != InputMode::Temporal {
            return Err(Error::Config(
                "cut dates only apply to temporal input".into(),
            ));
        }
        Ok(())
    }

    fn project_name(&self) -> String {
        self.project.clone().unwrap_or_else(|| {
            self.snapshots
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "project".to_owned())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: InputMode,
    pub snapshots: String,
    pub mode: GraphMode,
    pub lcc: bool,
    pub depth: Option<usize>,
    pub cuts: Vec<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub timestamp: NaiveDate,
    pub nodes: usize,
    pub edges: usize,
    pub modules: usize,
    pub q: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub project: String,
    pub config: ConfigEcho,
    pub snapshots: Vec<ReportRow>,
    pub stats: Option<ProjectStats>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.snapshots {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.timestamp,
                r.nodes,
                r.edges,
                r.modules,
                fixed6(r.q),
                r.degenerate
            )
            .unwrap();
        }
        out
    }

    pub fn read(path: &Path) -> Result<Report> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Report {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }
}

/// Loads one edge-list snapshot directory.
fn load_edgelist_dir(
    dir: &Path,
    depth: Option<NonZeroUsize>,
) -> Result<(DependencyGraph, ModulePartition)> {
    let records = read_edge_list(&dir.join(EDGES_FILE))?;
    let edges = records
        .iter()
        .map(|r| (r.source.as_str(), r.target.as_str()));
    let modules_path = dir.join(MODULES_FILE);
    if modules_path.is_file() {
        let pairs = read_modules(&modules_path)?;
        let graph = build_graph(edges, pairs.iter().map(|(n, _)| n))?;
        let partition = ModulePartition::from_assignments(pairs)?;
        Ok((graph, partition))
    } else {
        let graph = build_graph(edges, std::iter::empty::<&str>())?;
        let partition = partition_from_names(&graph, depth);
        Ok((graph, partition))
    }
}

fn load_source_dir(
    dir: &Path,
    depth: Option<NonZeroUsize>,
    exec: Execution,
) -> Result<(DependencyGraph, ModulePartition, usize)> {
    let snap = extract_snapshot(dir, exec)?;
    let partition = partition_from_names(&snap.graph, depth);
    Ok((snap.graph, partition, snap.stats.files_skipped))
}

/// Loads a single snapshot: an edge-list file, a directory with
/// `edges.tsv`, or a source tree.
pub fn load_snapshot(
    path: &Path,
    depth: Option<NonZeroUsize>,
    exec: Execution,
) -> Result<(DependencyGraph, ModulePartition)> {
    if path.is_file() {
        let records = read_edge_list(path)?;
        let graph = build_graph(
            records
                .iter()
                .map(|r| (r.source.as_str(), r.target.as_str())),
            std::iter::empty::<&str>(),
        )?;
        let partition = partition_from_names(&graph, depth);
        Ok((graph, partition))
    } else if path.join(EDGES_FILE).is_file() {
        load_edgelist_dir(path, depth)
    } else {
        let (g, p, _) = load_source_dir(path, depth, exec)?;
        Ok((g, p))
    }
}

/// Date-named snapshot directories under `root`, in date order.
fn snapshot_dirs(root: &Path, warnings: &mut Vec<String>) -> Result<Vec<(NaiveDate, PathBuf)>> {
    let mut dirs = Vec::new();
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut names: Vec<(String, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        names.push((
            entry.file_name().to_string_lossy().into_owned(),
            entry.path(),
        ));
    }
    names.sort();
    for (name, path) in names {
        match parse_date(&name) {
            Some(date) if path.is_dir() => dirs.push((date, path)),
            _ => warnings.push(format!(
                "ignoring `{name}`: not a date-named snapshot directory"
            )),
        }
    }
    if dirs.is_empty() {
        return Err(Error::Config(format!(
            "no date-named snapshot directories under {}",
            root.display()
        )));
    }
    Ok(dirs)
}

fn load_directory_series(
    config: &AnalysisConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
) -> Result<Vec<Snapshot>> {
    let dirs = snapshot_dirs(&config.snapshots, warnings)?;
    let loaded = exec.try_map(&dirs, |(date, dir)| -> Result<(Snapshot, usize)> {
        let (graph, partition, skipped) = match config.input {
            InputMode::Source => load_source_dir(dir, config.depth, Execution::Sequential)?,
            _ => {
                let (g, p) = load_edgelist_dir(dir, config.depth)?;
                (g, p, 0)
            }
        };
        Ok((
            Snapshot {
                date: *date,
                graph,
                partition,
            },
            skipped,
        ))
    })?;
    Ok(loaded
        .into_iter()
        .map(|(snapshot, skipped)| {
            if skipped > 0 {
                warnings.push(format!(
                    "{}: skipped {skipped} unreadable source file(s)",
                    snapshot.date
                ));
            }
            snapshot
        })
        .collect())
}

fn load_temporal_series(config: &AnalysisConfig) -> Result<Vec<Snapshot>> {
    let path = &config.snapshots;
    let records = read_edge_list(path)?;
    let mut dated = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        match r.date {
            Some(d) => dated.push((d, r.source.as_str(), r.target.as_str())),
            None => {
                return Err(Error::Config(format!(
                    "{}: edge record {} (`{}` -> `{}`) has no timestamp",
                    path.display(),
                    i + 1,
                    r.source,
                    r.target
                )))
            }
        }
    }
    let mut cuts = if config.cuts.is_empty() {
        dated.iter().map(|(d, _, _)| *d).collect::<Vec<_>>()
    } else {
        config.cuts.clone()
    };
    cuts.sort();
    cuts.dedup();

    cuts.into_iter()
        .map(|cut| {
            let graph = build_graph(
                dated
                    .iter()
                    .filter(|(d, _, _)| *d <= cut)
                    .map(|&(_, s, t)| (s, t)),
                std::iter::empty::<&str>(),
            )?;
            let partition = partition_from_names(&graph, config.depth);
            Ok(Snapshot {
                date: cut,
                graph,
                partition,
            })
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Builds the snapshot series, scores it, and writes the requested outputs.
pub fn run_analyze(config: &AnalysisConfig, exec: Execution) -> Result<Report> {
    config.validate()?;
    let mut warnings = Vec::new();
    let entries = match config.input {
        InputMode::Temporal => load_temporal_series(config)?,
        InputMode::Edgelist | InputMode::Source => {
            load_directory_series(config, exec, &mut warnings)?
        }
    };
    let project = config.project_name();
    let series = SnapshotSeries::new(project.clone(), entries)?;
    let series = q_series(series, config.mode, config.lcc, exec)?;

    let stats = match delta_stats(&series) {
        Ok(s) => Some(s),
        Err(EvolutionError::InsufficientHistory(n)) => {
            warnings.push(format!(
                "only {n} snapshot(s); change statistics need at least 2 and were omitted"
            ));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let snapshots = series
        .entries()
        .iter()
        .zip(series.metrics())
        .map(|(s, m)| ReportRow {
            timestamp: s.date,
            nodes: m.nodes,
            edges: m.edges,
            modules: m.modules,
            q: m.q,
            degenerate: m.degenerate,
        })
        .collect();

    let report = Report {
        tool: TOOL_NAME.to_owned(),
        version: VERSION.to_owned(),
        project,
        config: ConfigEcho {
            input: config.input,
            snapshots: config.snapshots.display().to_string(),
            mode: config.mode,
            lcc: config.lcc,
            depth: config.depth.map(NonZeroUsize::get),
            cuts: config.cuts.clone(),
        },
        snapshots,
        stats,
        warnings,
    };

    // Render everything before touching the filesystem.
    let json = report.to_json()?;
    let csv = report.to_csv();
    let graphml = match &config.graphml_dir {
        Some(_) => exec.try_map(series.entries(), |s| -> Result<(NaiveDate, String)> {
            let text = if config.lcc {
                render(
                    &largest_connected_component(&s.graph),
                    &s.partition,
                    ExportFormat::GraphMl,
                )?
            } else {
                render(&s.graph, &s.partition, ExportFormat::GraphMl)?
            };
            Ok((s.date, text))
        })?,
        None => Vec::new(),
    };

    if let Some(path) = &config.json_out {
        write_file(path, &json)?;
    }
    if let Some(path) = &config.csv_out {
        write_file(path, &csv)?;
    }
    if let Some(dir) = &config.graphml_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (date, text) in graphml {
            write_file(&dir.join(format!("{date}.graphml")), &text)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOutput {
    pub ranking: Ranking,
    pub groups: Option<Vec<Vec<RankedProject>>>,
    pub warnings: Vec<String>,
}

impl RankOutput {
    /// `rank,project,mean_dq,std_dq`
    pub fn ranking_csv(&self) -> String {
        let mut out = String::from("rank,project,mean_dq,std_dq\n");
        for e in &self.ranking.entries {
            writeln!(
                out,
                "{},{},{},{}",
                e.rank,
                e.stats.project,
                fixed6(e.stats.mean_dq),
                fixed6(e.stats.std_dq)
            )
            .unwrap();
        }
        out
    }

    /// `group,rank,project`, groups numbered from 1.
    pub fn groups_csv(&self) -> Option<String> {
        let groups = self.groups.as_ref()?;
        let mut out = String::from("group,rank,project\n");
        for (g, members) in groups.iter().enumerate() {
            for e in members {
                writeln!(out, "{},{},{}", g + 1, e.rank, e.stats.project).unwrap();
            }
        }
        Some(out)
    }
}

/// Ranks projects from their analysis reports and splits them into groups.
pub fn run_rank(
    reports: &[PathBuf],
    key: RankKey,
    order: SortOrder,
    groups: usize,
) -> Result<RankOutput> {
    if reports.is_empty() {
        return Err(Error::Config("no reports given".into()));
    }
    let mut stats = Vec::with_capacity(reports.len());
    for path in reports {
        let report = Report::read(path)?;
        let s = report.stats.ok_or_else(|| Error::Report {
            path: path.clone(),
            message: "no change statistics (fewer than 2 snapshots)".into(),
        })?;
        stats.push(s);
    }
    let ranking = rank_projects(&stats, key, order);
    let mut warnings = Vec::new();
    let groups = match group_ranking(&ranking, groups) {
        Ok(g) => Some(g),
        Err(e @ (EvolutionError::TooFewProjects { .. } | EvolutionError::NoGroups)) => {
            warnings.push(format!("grouping skipped: {e}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok(RankOutput {
        ranking,
        groups,
        warnings,
    })
}

/// Writes a planted-partition snapshot (`edges.tsv` + `modules.tsv`) to
/// `out_dir` and returns the generated graph.
pub fn run_synth(
    spec: &PlantedPartitionSpec,
    out_dir: &Path,
) -> Result<(DependencyGraph, ModulePartition)> {
    let (graph, partition) = planted_partition(spec)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_file(&out_dir.join(EDGES_FILE), &format_edge_list(&graph))?;
    write_file(&out_dir.join(MODULES_FILE), &format_modules(&partition))?;
    Ok((graph, partition))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(path: &Path, text: &str) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    }

    const FIVE: &str = "M1.n1\tM1.n2\nM1.n2\tM1.n1\nM1.n1\tM2.n3\nM2.n3\tM2.n4\nM2.n4\tM2.n3\n";

    #[test]
    fn two_edge_list_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("proj");
        write(&root.join("2004-01-01/edges.tsv"), FIVE);
        write(
            &root.join("2004-02-01/edges.tsv"),
            &format!("{FIVE}M1.n2\tM2.n4\n"),
        );
        write(&root.join("README"), "not a snapshot");
        let config = AnalysisConfig {
            snapshots: root,
            ..Default::default()
        };
        let report = run_analyze(&config, Execution::Parallel).unwrap();
        assert_eq!(report.project, "proj");
        assert_eq!(report.snapshots.len(), 2);
        let stats = report.stats.as_ref().unwrap();
        assert!((stats.mean_dq - (2.0 / 5.0 - 8.0 / 13.0)).abs() < 1e-12);
        assert_eq!(report.warnings.len(), 1);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("2004-01-01,4,5,2,0.615385,false"));
        assert!(csv.contains("2004-02-01,4,6,2,0.400000,false"));
    }

    #[test]
    fn modules_file_overrides_names() {
        let dir = tempfile::tempdir().unwrap();
        let snap = dir.path().join("2004-01-01");
        write(&snap.join("edges.tsv"), "1\t2\n2\t1\n1\t3\n3\t4\n4\t3\n");
        write(
            &snap.join("modules.tsv"),
            "1\tM1\n2\tM1\n3\tM2\n4\tM2\n5\tM2\n",
        );
        let (g, p) = load_snapshot(&snap, None, Execution::Sequential).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(p.module_of("3"), Some("M2"));
    }

    #[test]
    fn single_snapshot_omits_stats() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("2004-01-01/edges.tsv"), FIVE);
        let config = AnalysisConfig {
            snapshots: dir.path().to_owned(),
            project: Some("solo".into()),
            ..Default::default()
        };
        let report = run_analyze(&config, Execution::Sequential).unwrap();
        assert!(report.stats.is_none());
        assert!(report.warnings.iter().any(|w| w.contains("omitted")));
    }

    #[test]
    fn temporal_cuts() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("history.tsv");
        write(
            &file,
            "a.A\ta.B\t2004-01-01\na.B\tb.C\t2004-02-01\nb.C\tb.D\t2004-03-01\n",
        );
        let config = AnalysisConfig {
            input: InputMode::Temporal,
            snapshots: file.clone(),
            ..Default::default()
        };
        let report = run_analyze(&config, Execution::Sequential).unwrap();
        let edges: Vec<usize> = report.snapshots.iter().map(|r| r.edges).collect();
        assert_eq!(edges, [1, 2, 3]);
        assert!(report.snapshots[0].degenerate);

        let config = AnalysisConfig {
            cuts: vec![
                parse_date("2004-02-15").unwrap(),
                parse_date("2003-12-01").unwrap(),
            ],
            ..config
        };
        let report = run_analyze(&config, Execution::Sequential).unwrap();
        let edges: Vec<usize> = report.snapshots.iter().map(|r| r.edges).collect();
        assert_eq!(edges, [0, 2]);
    }

    #[test]
    fn temporal_requires_dates() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("history.tsv");
        write(&file, "a.A\ta.B\t2004-01-01\na.B\tb.C\n");
        let config = AnalysisConfig {
            input: InputMode::Temporal,
            snapshots: file,
            ..Default::default()
        };
        assert!(matches!(
            run_analyze(&config, Execution::Sequential),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn malformed_line_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("2004-01-01/edges.tsv"), "a\tb\nbroken\n");
        let config = AnalysisConfig {
            snapshots: dir.path().to_owned(),
            ..Default::default()
        };
        let err = run_analyze(&config, Execution::Sequential).unwrap_err();
        assert!(err
            .to_string()
            .ends_with("edges.tsv:2: expected 2 or 3 tab-separated fields, found 1"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn duplicate_outputs_rejected() {
        let config = AnalysisConfig {
            json_out: Some("x".into()),
            csv_out: Some("x".into()),
            ..Default::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rank_handles_small_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for (name, q) in [("beta", [0.1, 0.3]), ("alpha", [0.5, 0.2])] {
            let root = dir.path().join(name);
            write(&root.join("2004-01-01/edges.tsv"), FIVE);
            let report = Report {
                tool: TOOL_NAME.into(),
                version: VERSION.into(),
                project: name.into(),
                config: ConfigEcho {
                    input: InputMode::Edgelist,
                    snapshots: String::new(),
                    mode: GraphMode::Directed,
                    lcc: false,
                    depth: None,
                    cuts: vec![],
                },
                snapshots: vec![],
                stats: Some(crate::evolution::delta_stats_from_q(name, &q).unwrap()),
                warnings: vec![],
            };
            let path = dir.path().join(format!("{name}.json"));
            write(&path, &report.to_json().unwrap());
            paths.push(path);
        }
        let out = run_rank(&paths, RankKey::Mean, SortOrder::Asc, 4).unwrap();
        assert_eq!(
            out.ranking_csv(),
            "rank,project,mean_dq,std_dq\n1,alpha,-0.300000,0.000000\n2,beta,0.200000,0.000000\n"
        );
        assert!(out.groups.is_none());
        assert_eq!(out.warnings.len(), 1);

        let bad = dir.path().join("bad.json");
        write(&bad, "{ not json");
        let err = run_rank(&[bad], RankKey::Mean, SortOrder::Asc, 4).unwrap_err();
        assert!(err.to_string().contains("bad.json"));
    }

    #[test]
    fn synth_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PlantedPartitionSpec {
            k: 3,
            s: 6,
            p_in: 0.5,
            p_out: 0.05,
            directed: true,
            seed: 11,
        };
        let out = dir.path().join("2020-01-01");
        let (g, p) = run_synth(&spec, &out).unwrap();
        let (g2, p2) = load_snapshot(&out, None, Execution::Sequential).unwrap();
        assert_eq!(g, g2);
        assert_eq!(p, p2);
    }
}
