//! Heuristic class-dependency extraction from Java source trees.
//!
//! Each `.java` file is tokenized, its `package` and `import` statements and
//! top-level type declarations are recorded, and every other identifier that
//! starts with an uppercase letter is kept as a candidate type reference.
//! References are then resolved against the types declared in the snapshot
//! itself; anything defined outside the snapshot never becomes a node.
//!
//! Nested types are folded into their enclosing top-level type. This is not
//! a compiler front end: generics, annotations and local classes are just
//! identifiers here.

mod lexer;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

use crate::exec::Execution;
use crate::graph::{build_graph, partition_from_names, DependencyGraph, ModulePartition};

pub use lexer::{tokenize, LexError, Token};

pub const SOURCE_EXTENSION: &str = "java";

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("cannot read snapshot root {path}: {source}")]
    Root { path: PathBuf, source: io::Error },
    #[error("type `{fqn}` declared in both {} and {}", first.display(), second.display())]
    DuplicateType {
        fqn: String,
        first: PathBuf,
        second: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompilationUnit {
    /// Path relative to the snapshot root.
    pub path: PathBuf,
    /// Dotted package name; empty for the default package.
    pub package: String,
    /// Top-level type names in declaration order.
    pub declared_types: Vec<String>,
    /// Simple name → fully qualified name.
    pub single_imports: BTreeMap<String, String>,
    pub wildcard_imports: Vec<String>,
    pub referenced_identifiers: BTreeSet<String>,
    /// References attributed to each top-level type.
    pub type_references: BTreeMap<String, BTreeSet<String>>,
}

impl CompilationUnit {
    pub fn fqn(&self, simple: &str) -> String {
        if self.package.is_empty() {
            simple.to_owned()
        } else {
            format!("{}.{}", self.package, simple)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scan {
    pub units: Vec<CompilationUnit>,
    pub skipped: Vec<SkippedFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ExtractionStats {
    pub files_parsed: usize,
    pub files_skipped: usize,
    /// References that produced (or would have produced) an edge.
    pub resolved: usize,
    /// References to types declared in the same file.
    pub internal: usize,
    /// Single imports naming a type outside the snapshot.
    pub external: usize,
    /// Wildcard matches in two or more packages.
    pub ambiguous: usize,
    pub unresolved: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGraph {
    pub graph: DependencyGraph,
    pub partition: ModulePartition,
    pub stats: ExtractionStats,
}

fn is_type_reference(ident: &str) -> bool {
    ident.chars().next().is_some_and(char::is_uppercase)
}

/// Reads a dotted name starting at `i`; returns the segments, whether it
/// ended in `.*`, and the index just past the terminating `;`.
fn qualified_name(tokens: &[Token], mut i: usize) -> (Vec<String>, bool, usize) {
    let mut segments = Vec::new();
    let mut wildcard = false;
    while i < tokens.len() {
        match &tokens[i] {
            Token::Ident(s) => segments.push(s.clone()),
            Token::Punct('*') => wildcard = true,
            Token::Punct(';') => return (segments, wildcard, i + 1),
            Token::Punct(_) => {}
        }
        i += 1;
    }
    (segments, wildcard, i)
}

/// Extracts declarations, imports and references from one source file.
pub fn parse_unit(path: impl Into<PathBuf>, src: &str) -> Result<CompilationUnit, LexError> {
    let tokens = tokenize(src)?;
    let mut unit = CompilationUnit {
        path: path.into(),
        ..Default::default()
    };

    let mut depth = 0usize;
    let mut current: Option<String> = None;
    let mut opened = false;
    let mut pending: BTreeSet<String> = BTreeSet::new();
    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i] {
            Token::Punct('{') => {
                depth += 1;
                if current.is_some() {
                    opened = true;
                }
            }
            Token::Punct('}') => {
                depth = depth.saturating_sub(1);
                if depth == 0 && opened {
                    current = None;
                    opened = false;
                }
            }
            Token::Ident(kw) if depth == 0 && current.is_none() && kw == "package" => {
                let (segments, _, next) = qualified_name(&tokens, i + 1);
                unit.package = segments.join(".");
                i = next;
                continue;
            }
            Token::Ident(kw) if depth == 0 && current.is_none() && kw == "import" => {
                let (mut segments, wildcard, next) = qualified_name(&tokens, i + 1);
                i = next;
                // static imports name members, not types
                if segments.first().map(String::as_str) == Some("static") {
                    continue;
                }
                if wildcard {
                    let package = segments.join(".");
                    if !unit.wildcard_imports.contains(&package) {
                        unit.wildcard_imports.push(package);
                    }
                } else if let Some(simple) = segments.pop() {
                    let fqn = if segments.is_empty() {
                        simple.clone()
                    } else {
                        format!("{}.{}", segments.join("."), simple)
                    };
                    unit.single_imports.insert(simple, fqn);
                }
                continue;
            }
            Token::Ident(kw)
                if depth == 0
                    && matches!(kw.as_str(), "class" | "interface" | "enum" | "record")
                    && !matches!(
                        i.checked_sub(1).map(|p| &tokens[p]),
                        Some(Token::Punct('.'))
                    ) =>
            {
                if let Some(Token::Ident(name)) = tokens.get(i + 1) {
                    if !unit.declared_types.contains(name) {
                        unit.declared_types.push(name.clone());
                    }
                    unit.type_references
                        .entry(name.clone())
                        .or_default()
                        .append(&mut pending);
                    current = Some(name.clone());
                    opened = false;
                    i += 2;
                    continue;
                }
            }
            Token::Ident(ident) if is_type_reference(ident) => {
                unit.referenced_identifiers.insert(ident.clone());
                match &current {
                    Some(owner) => {
                        unit.type_references
                            .get_mut(owner)
                            .expect("owner registered")
                            .insert(ident.clone());
                    }
                    None => {
                        pending.insert(ident.clone());
                    }
                }
            }
            _ => {}
        }
        i += 1;
    }
    // trailing annotations or stray tokens belong to the first type
    if let Some(first) = unit.declared_types.first() {
        unit.type_references
            .get_mut(first)
            .expect("first type registered")
            .append(&mut pending);
    }
    Ok(unit)
}

/// Lexes every `.java` file under `root`. Unreadable, non-UTF-8 and
/// unlexable files are skipped and reported, never fatal.
pub fn scan_snapshot(root: &Path, exec: Execution) -> Result<Scan, ExtractError> {
    fs::read_dir(root).map_err(|source| ExtractError::Root {
        path: root.to_owned(),
        source,
    })?;

    let mut files = Vec::new();
    let mut skipped = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        match entry {
            Ok(e) => {
                let is_source = e.file_type().is_file()
                    && e.path().extension().is_some_and(|x| x == SOURCE_EXTENSION);
                if is_source {
                    files.push(e.into_path());
                }
            }
            Err(err) => skipped.push(SkippedFile {
                path: err.path().map(Path::to_path_buf).unwrap_or_default(),
                reason: err.to_string(),
            }),
        }
    }

    let parsed = exec.map(&files, |path| {
        let rel = path.strip_prefix(root).unwrap_or(path).to_path_buf();
        let bytes = fs::read(path).map_err(|e| (rel.clone(), e.to_string()))?;
        let src =
            String::from_utf8(bytes).map_err(|_| (rel.clone(), "invalid UTF-8".to_owned()))?;
        parse_unit(rel.clone(), &src).map_err(|e| (rel, e.to_string()))
    });

    let mut units = Vec::new();
    for result in parsed {
        match result {
            Ok(unit) => units.push(unit),
            Err((path, reason)) => skipped.push(SkippedFile { path, reason }),
        }
    }
    Ok(Scan { units, skipped })
}

/// Resolves references to snapshot-internal types and builds the graph.
///
/// For a reference `R` from a type in package `P`, in order: a type of the
/// same file is internal (no edge); a single import of `R` wins; then a type
/// `P.R`; then a unique wildcard-imported package declaring `R`. Anything
/// else is counted and dropped.
pub fn resolve_dependencies(units: &[CompilationUnit]) -> Result<SnapshotGraph, ExtractError> {
    let mut units: Vec<&CompilationUnit> = units.iter().collect();
    units.sort_by(|a, b| a.path.cmp(&b.path));

    let mut declared: BTreeMap<String, &Path> = BTreeMap::new();
    let mut by_package: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for unit in &units {
        for simple in &unit.declared_types {
            let fqn = unit.fqn(simple);
            if let Some(first) = declared.get(&fqn) {
                return Err(ExtractError::DuplicateType {
                    fqn,
                    first: first.to_path_buf(),
                    second: unit.path.clone(),
                });
            }
            declared.insert(fqn, &unit.path);
            by_package
                .entry(unit.package.as_str())
                .or_default()
                .insert(simple.as_str());
        }
    }

    let mut stats = ExtractionStats {
        files_parsed: units.len(),
        ..Default::default()
    };
    let mut edges: Vec<(String, String)> = Vec::new();
    for unit in &units {
        for (owner, refs) in &unit.type_references {
            let source = unit.fqn(owner);
            for reference in refs {
                if unit.declared_types.contains(reference) {
                    stats.internal += 1;
                    continue;
                }
                let target = if let Some(fqn) = unit.single_imports.get(reference) {
                    if !declared.contains_key(fqn) {
                        stats.external += 1;
                        continue;
                    }
                    fqn.clone()
                } else if by_package
                    .get(unit.package.as_str())
                    .is_some_and(|types| types.contains(reference.as_str()))
                {
                    unit.fqn(reference)
                } else {
                    let candidates: Vec<&String> = unit
                        .wildcard_imports
                        .iter()
                        .filter(|pkg| {
                            by_package
                                .get(pkg.as_str())
                                .is_some_and(|types| types.contains(reference.as_str()))
                        })
                        .collect();
                    match candidates.as_slice() {
                        [pkg] => format!("{pkg}.{reference}"),
                        [] => {
                            stats.unresolved += 1;
                            continue;
                        }
                        _ => {
                            stats.ambiguous += 1;
                            continue;
                        }
                    }
                };
                stats.resolved += 1;
                edges.push((source.clone(), target));
            }
        }
    }

    let graph = build_graph(edges, declared.keys()).expect("declared names are non-empty");
    let partition = partition_from_names(&graph, None);
    Ok(SnapshotGraph {
        graph,
        partition,
        stats,
    })
}

/// Scans `root` and resolves it into a graph in one step.
pub fn extract_snapshot(root: &Path, exec: Execution) -> Result<SnapshotGraph, ExtractError> {
    let scan = scan_snapshot(root, exec)?;
    let mut snapshot = resolve_dependencies(&scan.units)?;
    snapshot.stats.files_skipped = scan.skipped.len();
    Ok(snapshot)
}
