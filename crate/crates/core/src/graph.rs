//! Directed class-dependency graphs and module partitions.
//!
//! A [`DependencyGraph`] is a simple directed graph over fully qualified
//! class names: no self-loops, no parallel edges, nodes kept in
//! lexicographic order so that every derived output is deterministic.
//! A [`ModulePartition`] assigns every class to a module label, usually its
//! package.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::num::NonZeroUsize;

use thiserror::Error;

/// Label given to classes that live in no package.
pub const DEFAULT_MODULE: &str = "<default>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("record {record}: empty node name")]
    EmptyNodeName { record: usize },
    #[error("node `{node}`: empty module label")]
    EmptyModuleLabel { node: String },
}

/// Fully qualified class identifier, e.g. `org.example.Foo`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Option<Self> {
        let name = name.into();
        if name.is_empty() {
            None
        } else {
            Some(NodeId(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Immutable directed simple graph.
///
/// Edges are stored as sorted, deduplicated pairs of node indices; node `i`
/// is the `i`-th name in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyGraph {
    nodes: Vec<NodeId>,
    edges: Vec<(usize, usize)>,
}

impl DependencyGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &NodeId {
        &self.nodes[index]
    }

    /// Edges as index pairs, sorted by (source, target).
    pub fn edge_indices(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.edges
            .iter()
            .map(move |&(s, t)| (&self.nodes[s], &self.nodes[t]))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn contains_node(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub fn contains_edge(&self, source: &str, target: &str) -> bool {
        match (self.index_of(source), self.index_of(target)) {
            (Some(s), Some(t)) => self.edges.binary_search(&(s, t)).is_ok(),
            _ => false,
        }
    }

    /// Induced subgraph on the given node indices.
    fn induced(&self, keep: &[bool]) -> DependencyGraph {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if keep[i] {
                remap[i] = nodes.len();
                nodes.push(node.clone());
            }
        }
        // Remapping is monotone, so the edge list stays sorted.
        let edges = self
            .edges
            .iter()
            .filter(|&&(s, t)| keep[s] && keep[t])
            .map(|&(s, t)| (remap[s], remap[t]))
            .collect();
        DependencyGraph { nodes, edges }
    }
}

/// Builds a graph from `(source, target)` dependency records.
///
/// Duplicate records collapse to one edge, self-dependencies are dropped and
/// `extra_nodes` are added even when isolated. The result does not depend on
/// record order. Record numbers in errors are 1-based; extra nodes are
/// numbered after the edge records.
pub fn build_graph<I, S, N>(edges: I, extra_nodes: N) -> Result<DependencyGraph, GraphError>
where
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<str>,
    N: IntoIterator,
    N::Item: AsRef<str>,
{
    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut record = 0;
    for (source, target) in edges {
        record += 1;
        let (source, target) = (source.as_ref(), target.as_ref());
        if source.is_empty() || target.is_empty() {
            return Err(GraphError::EmptyNodeName { record });
        }
        names.insert(source.to_owned());
        names.insert(target.to_owned());
        if source != target {
            pairs.push((source.to_owned(), target.to_owned()));
        }
    }
    for extra in extra_nodes {
        record += 1;
        let extra = extra.as_ref();
        if extra.is_empty() {
            return Err(GraphError::EmptyNodeName { record });
        }
        names.insert(extra.to_owned());
    }

    let nodes: Vec<NodeId> = names.into_iter().map(NodeId).collect();
    let index = |name: &str| {
        nodes
            .binary_search_by(|n| n.as_str().cmp(name))
            .expect("edge endpoint registered as node")
    };
    let mut edges: Vec<(usize, usize)> = pairs.iter().map(|(s, t)| (index(s), index(t))).collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(DependencyGraph { nodes, edges })
}

/// Union-find over node indices; used for weak connectivity.
struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Induced subgraph on the largest weakly connected component.
///
/// Ties between equally large components go to the one containing the
/// lexicographically smallest node name.
pub fn largest_connected_component(g: &DependencyGraph) -> DependencyGraph {
    let n = g.node_count();
    if n == 0 {
        return DependencyGraph::empty();
    }
    let mut sets = DisjointSet::new(n);
    for &(s, t) in g.edge_indices() {
        sets.union(s, t);
    }
    // Nodes are visited in lexicographic order, so the first root to reach
    // the maximum size owns the smallest member among the largest components.
    let roots: Vec<usize> = (0..n).map(|i| sets.find(i)).collect();
    let mut best: Option<(usize, usize)> = None;
    for &root in &roots {
        let size = sets.size[root];
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((root, size));
        }
    }
    let (winner, _) = best.expect("non-empty graph");
    let keep: Vec<bool> = roots.iter().map(|&r| r == winner).collect();
    g.induced(&keep)
}

/// Adds the reverse of every edge.
pub fn symmetrize(g: &DependencyGraph) -> DependencyGraph {
    let mut edges = Vec::with_capacity(g.edge_count() * 2);
    for &(s, t) in g.edge_indices() {
        edges.push((s, t));
        edges.push((t, s));
    }
    edges.sort_unstable();
    edges.dedup();
    DependencyGraph {
        nodes: g.nodes.clone(),
        edges,
    }
}

/// Total assignment of classes to module labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModulePartition {
    assignment: BTreeMap<NodeId, usize>,
    labels: Vec<String>,
}

impl ModulePartition {
    /// Builds a partition from `(node, label)` pairs. A node listed twice
    /// keeps its last label.
    pub fn from_assignments<I, A, B>(pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut raw: BTreeMap<NodeId, String> = BTreeMap::new();
        for (record, (node, label)) in pairs.into_iter().enumerate() {
            let node = NodeId::new(node.as_ref())
                .ok_or(GraphError::EmptyNodeName { record: record + 1 })?;
            let label = label.as_ref();
            if label.is_empty() {
                return Err(GraphError::EmptyModuleLabel {
                    node: node.to_string(),
                });
            }
            raw.insert(node, label.to_owned());
        }
        let labels: Vec<String> = raw
            .values()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let assignment = raw
            .into_iter()
            .map(|(node, label)| {
                let idx = labels.binary_search(&label).expect("label indexed");
                (node, idx)
            })
            .collect();
        Ok(ModulePartition { assignment, labels })
    }

    /// Module labels in lexicographic order; position is the module index.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn module_count(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn module_index(&self, node: &str) -> Option<usize> {
        // BTreeMap<NodeId, _> cannot be queried by &str without an owned key.
        self.assignment.get(&NodeId(node.to_owned())).copied()
    }

    pub fn module_of(&self, node: &str) -> Option<&str> {
        self.module_index(node).map(|i| self.labels[i].as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &str)> + '_ {
        self.assignment
            .iter()
            .map(move |(n, &i)| (n, self.labels[i].as_str()))
    }

    /// Module index for every node of `g`, in node order. Returns the first
    /// node without an assignment on failure.
    pub fn index_nodes(&self, g: &DependencyGraph) -> Result<Vec<usize>, NodeId> {
        g.nodes()
            .iter()
            .map(|n| self.assignment.get(n).copied().ok_or_else(|| n.clone()))
            .collect()
    }

    /// Number of distinct modules among the nodes of `g`.
    pub fn modules_present(&self, g: &DependencyGraph) -> usize {
        g.nodes()
            .iter()
            .filter_map(|n| self.assignment.get(n))
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// Package of a dotted class name, optionally truncated to `depth` segments.
pub fn package_label(name: &str, depth: Option<NonZeroUsize>) -> &str {
    let Some(dot) = name.rfind('.') else {
        return DEFAULT_MODULE;
    };
    let package = &name[..dot];
    if package.is_empty() {
        return DEFAULT_MODULE;
    }
    match depth {
        Some(d) => match package.match_indices('.').nth(d.get() - 1) {
            Some((cut, _)) => &package[..cut],
            None => package,
        },
        None => package,
    }
}

/// Assigns each node to its package (see [`package_label`]).
pub fn partition_from_names(g: &DependencyGraph, depth: Option<NonZeroUsize>) -> ModulePartition {
    ModulePartition::from_assignments(
        g.nodes()
            .iter()
            .map(|n| (n.as_str(), package_label(n.as_str(), depth))),
    )
    .expect("node names and package labels are non-empty")
}
