//! Mixing matrix and the Q-metric.
//!
//! For a partition of the nodes into `n` modules, `e[i][j]` is the fraction
//! of all edges running from module `i` to module `j`, `a` and `b` are the
//! row and column sums of `e`, and
//!
//! ```text
//! Q = (Σ e_ii − Σ a_i·b_i) / (1 − Σ a_i·b_i)
//! ```
//!
//! When every edge lies inside a single module the denominator vanishes;
//! that case, and the edgeless graph, score `Q = 0` and are flagged
//! degenerate.
//!
//! Edge counts are accumulated as integers and `Q` is formed from one exact
//! integer numerator and denominator, so the only rounding is the final
//! division.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{partition_from_names, symmetrize, DependencyGraph, ModulePartition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModularityError {
    #[error("node `{0}` has no module assignment")]
    MissingNode(String),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("package depth must be at least 1, got {0}")]
    InvalidDepth(usize),
}

/// Whether edge direction is respected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    #[default]
    Directed,
    /// Every edge is counted in both directions.
    Undirected,
}

impl std::str::FromStr for GraphMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "directed" => Ok(GraphMode::Directed),
            "undirected" => Ok(GraphMode::Undirected),
            other => Err(format!("unknown graph mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    labels: Vec<String>,
    counts: Vec<u64>,
    row_counts: Vec<u64>,
    col_counts: Vec<u64>,
    edge_total: u64,
}

impl MixingMatrix {
    /// Module count `n`.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edge_total(&self) -> u64 {
        self.edge_total
    }

    /// Number of edges from module `i` to module `j`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n() + j]
    }

    /// `e_ij`.
    pub fn e(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.edge_total as f64
    }

    /// Row sums `a_i`.
    pub fn a(&self) -> Vec<f64> {
        self.fractions(&self.row_counts)
    }

    /// Column sums `b_i`.
    pub fn b(&self) -> Vec<f64> {
        self.fractions(&self.col_counts)
    }

    fn fractions(&self, counts: &[u64]) -> Vec<f64> {
        counts
            .iter()
            .map(|&c| c as f64 / self.edge_total as f64)
            .collect()
    }

    fn intra_count(&self) -> u64 {
        (0..self.n()).map(|i| self.count(i, i)).sum()
    }

    fn margin_product(&self) -> u128 {
        self.row_counts
            .iter()
            .zip(&self.col_counts)
            .map(|(&r, &c)| r as u128 * c as u128)
            .sum()
    }

    /// True when all edges fall in a single diagonal cell.
    fn single_module(&self) -> bool {
        let n = self.n();
        (0..n).any(|i| self.count(i, i) == self.edge_total)
    }
}

/// Builds the mixing matrix of `g` under `p`.
///
/// Modules of `p` that own no nodes of `g` are kept as empty rows/columns.
pub fn mixing_matrix(
    g: &DependencyGraph,
    p: &ModulePartition,
) -> Result<MixingMatrix, ModularityError> {
    let module_of = p
        .index_nodes(g)
        .map_err(|node| ModularityError::MissingNode(node.to_string()))?;
    if g.edge_count() == 0 {
        return Err(ModularityError::EmptyGraph);
    }
    let n = p.module_count();
    let mut counts = vec![0u64; n * n];
    let mut row_counts = vec![0u64; n];
    let mut col_counts = vec![0u64; n];
    for &(s, t) in g.edge_indices() {
        let (i, j) = (module_of[s], module_of[t]);
        counts[i * n + j] += 1;
        row_counts[i] += 1;
        col_counts[j] += 1;
    }
    Ok(MixingMatrix {
        labels: p.labels().to_vec(),
        counts,
        row_counts,
        col_counts,
        edge_total: g.edge_count() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularityScore {
    pub q: f64,
    /// Set when the `Q = 0` convention was applied.
    pub degenerate: bool,
    /// `Σ e_ii`.
    pub intra_fraction: f64,
    /// `Σ a_i·b_i`.
    pub null_expectation: f64,
}

impl ModularityScore {
    fn degenerate(intra_fraction: f64, null_expectation: f64) -> Self {
        ModularityScore {
            q: 0.0,
            degenerate: true,
            intra_fraction,
            null_expectation,
        }
    }
}

/// Q of a precomputed mixing matrix.
pub fn score_matrix(mm: &MixingMatrix) -> ModularityScore {
    let m = mm.edge_total as u128;
    let intra = mm.intra_count() as u128;
    let margins = mm.margin_product();
    let m2 = m * m;
    let intra_fraction = intra as f64 / m as f64;
    let null_expectation = margins as f64 / m2 as f64;

    if mm.single_module() || (1.0 - null_expectation).abs() < 1e-12 {
        return ModularityScore::degenerate(intra_fraction, null_expectation);
    }
    // Q = (m·intra − Σ r_i c_i) / (m² − Σ r_i c_i)
    let numerator = (m * intra) as i128 - margins as i128;
    let denominator = (m2 - margins) as i128;
    ModularityScore {
        q: numerator as f64 / denominator as f64,
        degenerate: false,
        intra_fraction,
        null_expectation,
    }
}

/// Q of `g` under partition `p`.
pub fn modularity_q(
    g: &DependencyGraph,
    p: &ModulePartition,
    mode: GraphMode,
) -> Result<ModularityScore, ModularityError> {
    let symmetric;
    let g = match mode {
        GraphMode::Directed => g,
        GraphMode::Undirected => {
            symmetric = symmetrize(g);
            &symmetric
        }
    };
    match mixing_matrix(g, p) {
        Ok(mm) => Ok(score_matrix(&mm)),
        Err(ModularityError::EmptyGraph) => Ok(ModularityScore::degenerate(0.0, 0.0)),
        Err(e) => Err(e),
    }
}

/// Q with modules taken from package names truncated to `depth` segments.
pub fn q_at_depth(
    g: &DependencyGraph,
    depth: usize,
    mode: GraphMode,
) -> Result<ModularityScore, ModularityError> {
    let depth = NonZeroUsize::new(depth).ok_or(ModularityError::InvalidDepth(depth))?;
    modularity_q(g, &partition_from_names(g, Some(depth)), mode)
}
