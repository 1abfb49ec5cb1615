//! Synthetic benchmark graphs and an independent Q oracle.
//!
//! Planted-partition graphs have `k` modules of `s` nodes each. Nodes are
//! named `m<i>.c<j>` with zero-padded indices, so lexicographic order equals
//! generation order and the package of each node is its planted module.
//! Candidate pairs are visited source-major, target-minor, one Bernoulli draw
//! per pair (ordered pairs when directed, `u < v` when undirected).

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{build_graph, DependencyGraph, ModulePartition};
use crate::modularity::{modularity_q, GraphMode, ModularityError};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Modularity(#[from] ModularityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartitionSpec {
    /// Module count.
    pub k: usize,
    /// Nodes per module.
    pub s: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub directed: bool,
    pub seed: u64,
}

impl PlantedPartitionSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.k < 1 || self.s < 1 {
            return Err(SynthError::InvalidSpec(format!(
                "k and s must be at least 1 (k={}, s={})",
                self.k, self.s
            )));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidSpec(format!(
                    "{name}={p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        PlantedPartitionSpec { seed, ..self }
    }
}

fn width(count: usize) -> usize {
    count.saturating_sub(1).to_string().len()
}

/// Generates a planted-partition graph and its planted modules.
pub fn planted_partition(
    spec: &PlantedPartitionSpec,
) -> Result<(DependencyGraph, ModulePartition), SynthError> {
    spec.validate()?;
    let (mw, nw) = (width(spec.k), width(spec.s));
    let modules: Vec<String> = (0..spec.k).map(|i| format!("m{i:0mw$}")).collect();
    let names: Vec<String> = (0..spec.k * spec.s)
        .map(|u| format!("{}.c{:0nw$}", modules[u / spec.s], u % spec.s))
        .collect();
    let n = names.len();

    let mut rng = SeededRng::new(spec.seed);
    let mut edges: Vec<(&str, &str)> = Vec::new();
    for u in 0..n {
        let start = if spec.directed { 0 } else { u + 1 };
        for v in start..n {
            if u == v {
                continue;
            }
            let p = if u / spec.s == v / spec.s {
                spec.p_in
            } else {
                spec.p_out
            };
            if rng.bernoulli(p) {
                edges.push((&names[u], &names[v]));
                if !spec.directed {
                    edges.push((&names[v], &names[u]));
                }
            }
        }
    }
    let g = build_graph(edges, &names).expect("generated names are non-empty");
    let p = ModulePartition::from_assignments(
        names
            .iter()
            .enumerate()
            .map(|(u, name)| (name, &modules[u / spec.s])),
    )
    .expect("generated labels are non-empty");
    Ok((g, p))
}

/// Assigns each node (in node order) uniformly to one of `k` labels `r<i>`.
pub fn random_partition(
    g: &DependencyGraph,
    k: usize,
    seed: u64,
) -> Result<ModulePartition, SynthError> {
    if k < 1 {
        return Err(SynthError::InvalidSpec(
            "module count must be at least 1".into(),
        ));
    }
    let w = width(k);
    let mut rng = SeededRng::new(seed);
    let pairs: Vec<(String, String)> = g
        .nodes()
        .iter()
        .map(|n| (n.to_string(), format!("r{:0w$}", rng.below(k as u64))))
        .collect();
    Ok(ModulePartition::from_assignments(pairs).expect("labels are non-empty"))
}

/// Q computed edge by edge with plain floating-point sums.
///
/// Deliberately shares no code with [`crate::modularity`]: the module index,
/// the undirected expansion and the degenerate test are all redone here.
pub fn brute_force_q(
    g: &DependencyGraph,
    p: &ModulePartition,
    mode: GraphMode,
) -> Result<f64, ModularityError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (s, t) in g.edges() {
        let fwd = (s.to_string(), t.to_string());
        if seen.insert(fwd.clone()) {
            pairs.push(fwd);
        }
        if mode == GraphMode::Undirected {
            let back = (t.to_string(), s.to_string());
            if seen.insert(back.clone()) {
                pairs.push(back);
            }
        }
    }
    for node in g.nodes() {
        if p.module_of(node.as_str()).is_none() {
            return Err(ModularityError::MissingNode(node.to_string()));
        }
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (_, label) in p.iter() {
        let next = index.len();
        index.entry(label).or_insert(next);
    }
    let n = index.len();
    let m = pairs.len() as f64;
    let mut e = vec![vec![0.0f64; n]; n];
    let mut intra_labels: HashSet<usize> = HashSet::new();
    let mut any_cross = false;
    for (s, t) in &pairs {
        let i = index[p.module_of(s).unwrap()];
        let j = index[p.module_of(t).unwrap()];
        e[i][j] += 1.0 / m;
        if i == j {
            intra_labels.insert(i);
        } else {
            any_cross = true;
        }
    }
    if !any_cross && intra_labels.len() == 1 {
        return Ok(0.0);
    }

    let mut trace = 0.0;
    let mut expected = 0.0;
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        trace += e[i][i];
        let a_i: f64 = (0..n).map(|j| e[i][j]).sum();
        let b_i: f64 = (0..n).map(|j| e[j][i]).sum();
        expected += a_i * b_i;
    }
    if (1.0 - expected).abs() < 1e-12 {
        return Ok(0.0);
    }
    Ok((trace - expected) / (1.0 - expected))
}

/// Q of the planted partition for each seed, in seed order.
pub fn planted_q_sweep(
    spec: &PlantedPartitionSpec,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<f64>, SynthError> {
    let mode = if spec.directed {
        GraphMode::Directed
    } else {
        GraphMode::Undirected
    };
    exec.try_map(seeds, |&seed| {
        let (g, p) = planted_partition(&spec.with_seed(seed))?;
        Ok(modularity_q(&g, &p, mode)?.q)
    })
}
