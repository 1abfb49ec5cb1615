//! GraphML and DOT export for external network viewers.
//!
//! Both formats carry each node's module label and module index (the label's
//! position in the partition's sorted label list). Output is a pure function
//! of the graph and partition.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{DependencyGraph, ModulePartition};

/// ColorBrewer "Set3", 12 classes.
pub const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
    "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("node `{0}` has no module assignment")]
    MissingNode(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
        }
    }
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

fn module_indices(g: &DependencyGraph, p: &ModulePartition) -> Result<Vec<usize>, ExportError> {
    p.index_nodes(g)
        .map_err(|node| ExportError::MissingNode(node.to_string()))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_graphml(g: &DependencyGraph, p: &ModulePartition) -> Result<String, ExportError> {
    let modules = module_indices(g, p)?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"module\" for=\"node\" attr.name=\"module\" attr.type=\"string\"/>\n");
    out.push_str(
        "  <key id=\"moduleIndex\" for=\"node\" attr.name=\"moduleIndex\" attr.type=\"int\"/>\n",
    );
    out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");
    for (i, node) in g.nodes().iter().enumerate() {
        let m = modules[i];
        writeln!(out, "    <node id=\"n{i}\">").unwrap();
        writeln!(
            out,
            "      <data key=\"label\">{}</data>",
            xml_escape(node.as_str())
        )
        .unwrap();
        writeln!(
            out,
            "      <data key=\"module\">{}</data>",
            xml_escape(&p.labels()[m])
        )
        .unwrap();
        writeln!(out, "      <data key=\"moduleIndex\">{m}</data>").unwrap();
        out.push_str("    </node>\n");
    }
    for (k, &(s, t)) in g.edge_indices().iter().enumerate() {
        writeln!(
            out,
            "    <edge id=\"e{k}\" source=\"n{s}\" target=\"n{t}\"/>"
        )
        .unwrap();
    }
    out.push_str("  </graph>\n</graphml>\n");
    Ok(out)
}

pub fn to_dot(g: &DependencyGraph, p: &ModulePartition) -> Result<String, ExportError> {
    let modules = module_indices(g, p)?;
    let mut out = String::from("digraph modq {\n  node [style=filled];\n");
    for (i, node) in g.nodes().iter().enumerate() {
        let m = modules[i];
        writeln!(
            out,
            "  {} [module={}, moduleIndex={m}, color=\"{}\"];",
            dot_quote(node.as_str()),
            dot_quote(&p.labels()[m]),
            PALETTE[m % PALETTE.len()]
        )
        .unwrap();
    }
    for (s, t) in g.edges() {
        writeln!(
            out,
            "  {} -> {};",
            dot_quote(s.as_str()),
            dot_quote(t.as_str())
        )
        .unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn render(
    g: &DependencyGraph,
    p: &ModulePartition,
    format: ExportFormat,
) -> Result<String, ExportError> {
    match format {
        ExportFormat::GraphMl => to_graphml(g, p),
        ExportFormat::Dot => to_dot(g, p),
    }
}

pub fn export_graph(
    g: &DependencyGraph,
    p: &ModulePartition,
    format: ExportFormat,
    out: &Path,
) -> Result<(), ExportError> {
    let text = render(g, p, format)?;
    fs::write(out, text).map_err(|source| ExportError::Io {
        path: out.to_owned(),
        source,
    })
}
