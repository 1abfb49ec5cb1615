//! Q over a series of snapshots, change statistics and project rankings.

use std::cmp::Ordering;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{largest_connected_component, DependencyGraph, ModulePartition};
use crate::modularity::{modularity_q, GraphMode, ModularityError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("snapshot {later} does not come after {earlier}")]
    Unordered {
        earlier: NaiveDate,
        later: NaiveDate,
    },
    #[error("snapshot {date}: {source}")]
    Snapshot {
        date: NaiveDate,
        source: ModularityError,
    },
    #[error("insufficient history: {0} snapshot(s), need at least 2")]
    InsufficientHistory(usize),
    #[error("cannot form {groups} groups from {projects} project(s)")]
    TooFewProjects { projects: usize, groups: usize },
    #[error("group count must be at least 1")]
    NoGroups,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub date: NaiveDate,
    pub graph: DependencyGraph,
    pub partition: ModulePartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetrics {
    pub q: f64,
    pub nodes: usize,
    pub edges: usize,
    pub modules: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    project: String,
    entries: Vec<Snapshot>,
    metrics: Vec<SnapshotMetrics>,
}

impl SnapshotSeries {
    /// Entries must have strictly increasing dates.
    pub fn new(project: impl Into<String>, entries: Vec<Snapshot>) -> Result<Self, EvolutionError> {
        for pair in entries.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(EvolutionError::Unordered {
                    earlier: pair[0].date,
                    later: pair[1].date,
                });
            }
        }
        Ok(SnapshotSeries {
            project: project.into(),
            entries,
            metrics: Vec::new(),
        })
    }

    pub fn project(&self) -> &str {
        &self.project
    }

    pub fn entries(&self) -> &[Snapshot] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per-snapshot metrics; empty until [`q_series`] has run.
    pub fn metrics(&self) -> &[SnapshotMetrics] {
        &self.metrics
    }

    pub fn q_values(&self) -> Vec<f64> {
        self.metrics.iter().map(|m| m.q).collect()
    }
}

fn evaluate(
    snapshot: &Snapshot,
    mode: GraphMode,
    lcc: bool,
) -> Result<SnapshotMetrics, EvolutionError> {
    let reduced;
    let graph = if lcc {
        reduced = largest_connected_component(&snapshot.graph);
        &reduced
    } else {
        &snapshot.graph
    };
    let score = modularity_q(graph, &snapshot.partition, mode).map_err(|source| {
        EvolutionError::Snapshot {
            date: snapshot.date,
            source,
        }
    })?;
    Ok(SnapshotMetrics {
        q: score.q,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        modules: snapshot.partition.modules_present(graph),
        degenerate: score.degenerate,
    })
}

/// Scores every snapshot, optionally on its largest connected component.
pub fn q_series(
    series: SnapshotSeries,
    mode: GraphMode,
    lcc: bool,
    exec: Execution,
) -> Result<SnapshotSeries, EvolutionError> {
    let metrics = exec.try_map(&series.entries, |s| evaluate(s, mode, lcc))?;
    Ok(SnapshotSeries { metrics, ..series })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectStats {
    pub project: String,
    /// Mean of `Q(t+1) − Q(t)`.
    pub mean_dq: f64,
    /// Sample standard deviation of the same differences; 0 with only one.
    pub std_dq: f64,
    pub first_q: f64,
    pub last_q: f64,
    pub n_snapshots: usize,
}

/// Change statistics of a Q trajectory.
pub fn delta_stats_from_q(project: &str, q: &[f64]) -> Result<ProjectStats, EvolutionError> {
    if q.len() < 2 {
        return Err(EvolutionError::InsufficientHistory(q.len()));
    }
    let diffs: Vec<f64> = q.windows(2).map(|w| w[1] - w[0]).collect();
    let count = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / count;
    let std = if diffs.len() < 2 {
        0.0
    } else {
        let ss: f64 = diffs.iter().map(|d| (d - mean).powi(2)).sum();
        (ss / (count - 1.0)).sqrt()
    };
    Ok(ProjectStats {
        project: project.to_owned(),
        mean_dq: mean,
        std_dq: std,
        first_q: q[0],
        last_q: q[q.len() - 1],
        n_snapshots: q.len(),
    })
}

/// Change statistics of a scored series.
pub fn delta_stats(series: &SnapshotSeries) -> Result<ProjectStats, EvolutionError> {
    if series.metrics.len() != series.entries.len() {
        return Err(EvolutionError::InsufficientHistory(series.metrics.len()));
    }
    delta_stats_from_q(&series.project, &series.q_values())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RankKey {
    #[default]
    Mean,
    Std,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    #[default]
    Asc,
    Desc,
}

impl std::str::FromStr for RankKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(RankKey::Mean),
            "std" => Ok(RankKey::Std),
            other => Err(format!("unknown ranking key `{other}`")),
        }
    }
}

impl std::str::FromStr for SortOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" => Ok(SortOrder::Asc),
            "desc" => Ok(SortOrder::Desc),
            other => Err(format!("unknown sort order `{other}`")),
        }
    }
}

impl RankKey {
    fn of(self, s: &ProjectStats) -> f64 {
        match self {
            RankKey::Mean => s.mean_dq,
            RankKey::Std => s.std_dq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedProject {
    /// 1-based position.
    pub rank: usize,
    pub stats: ProjectStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub key: RankKey,
    pub order: SortOrder,
    pub entries: Vec<RankedProject>,
}

/// Orders projects by `key`; ties go to the alphabetically first project
/// regardless of `order`.
pub fn rank_projects(stats: &[ProjectStats], key: RankKey, order: SortOrder) -> Ranking {
    let mut sorted: Vec<ProjectStats> = stats.to_vec();
    sorted.sort_by(|a, b| {
        let by_key = key.of(a).total_cmp(&key.of(b));
        let by_key = match order {
            SortOrder::Asc => by_key,
            SortOrder::Desc => by_key.reverse(),
        };
        match by_key {
            Ordering::Equal => a.project.cmp(&b.project),
            other => other,
        }
    });
    Ranking {
        key,
        order,
        entries: sorted
            .into_iter()
            .enumerate()
            .map(|(i, stats)| RankedProject { rank: i + 1, stats })
            .collect(),
    }
}

/// Splits a ranking into `k` contiguous groups whose sizes differ by at
/// most one, larger groups first.
pub fn group_ranking(
    ranking: &Ranking,
    k: usize,
) -> Result<Vec<Vec<RankedProject>>, EvolutionError> {
    if k == 0 {
        return Err(EvolutionError::NoGroups);
    }
    let n = ranking.entries.len();
    if n < k {
        return Err(EvolutionError::TooFewProjects {
            projects: n,
            groups: k,
        });
    }
    let (base, extra) = (n / k, n % k);
    let mut groups = Vec::with_capacity(k);
    let mut start = 0;
    for g in 0..k {
        let size = base + usize::from(g < extra);
        groups.push(ranking.entries[start..start + size].to_vec());
        start += size;
    }
    Ok(groups)
}

pub fn group_projects(
    stats: &[ProjectStats],
    key: RankKey,
    order: SortOrder,
    k: usize,
) -> Result<Vec<Vec<RankedProject>>, EvolutionError> {
    group_ranking(&rank_projects(stats, key, order), k)
}
