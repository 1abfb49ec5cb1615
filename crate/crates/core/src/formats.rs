//! Text formats: edge lists, module assignments and fixed-precision numbers.
//!
//! Edge list: UTF-8, one dependency per line as `source<TAB>target`, with an
//! optional third field holding an ISO-8601 date (`YYYY-MM-DD`). Blank lines
//! and lines starting with `#` are ignored.
//!
//! Module file: `node<TAB>module` per line, same comment rules.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use thiserror::Error;

use crate::graph::{DependencyGraph, ModulePartition};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}:{line}: {message}", file.display())]
    Line {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl FormatError {
    fn line(file: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Line {
            file: file.to_owned(),
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub date: Option<NaiveDate>,
}

/// Non-comment lines with 1-based line numbers.
fn records<'a>(text: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Parses an edge list; `file` is only used in error messages.
pub fn parse_edge_list(text: &str, file: &Path) -> Result<Vec<EdgeRecord>, FormatError> {
    records(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(FormatError::line(
                    file,
                    n,
                    format!(
                        "expected 2 or 3 tab-separated fields, found {}",
                        fields.len()
                    ),
                ));
            }
            let (source, target) = (fields[0].trim(), fields[1].trim());
            if source.is_empty() || target.is_empty() {
                return Err(FormatError::line(file, n, "empty node name"));
            }
            let date = match fields.get(2) {
                Some(raw) => Some(parse_date(raw).ok_or_else(|| {
                    FormatError::line(file, n, format!("invalid date `{}`", raw.trim()))
                })?),
                None => None,
            };
            Ok(EdgeRecord {
                source: source.to_owned(),
                target: target.to_owned(),
                date,
            })
        })
        .collect()
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    let bytes = fs::read(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| {
        let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
        FormatError::line(path, line, "invalid UTF-8")
    })
}

pub fn read_edge_list(path: &Path) -> Result<Vec<EdgeRecord>, FormatError> {
    parse_edge_list(&read_text(path)?, path)
}

/// Parses `node<TAB>module` lines into `(node, module)` pairs.
pub fn parse_modules(text: &str, file: &Path) -> Result<Vec<(String, String)>, FormatError> {
    records(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            match fields.as_slice() {
                [node, module] if !node.is_empty() && !module.is_empty() => {
                    Ok(((*node).to_owned(), (*module).to_owned()))
                }
                [_, _] => Err(FormatError::line(file, n, "empty node or module name")),
                _ => Err(FormatError::line(
                    file,
                    n,
                    format!("expected 2 tab-separated fields, found {}", fields.len()),
                )),
            }
        })
        .collect()
}

pub fn read_modules(path: &Path) -> Result<Vec<(String, String)>, FormatError> {
    parse_modules(&read_text(path)?, path)
}

pub fn format_edge_list(g: &DependencyGraph) -> String {
    let mut out = String::new();
    for (s, t) in g.edges() {
        writeln!(out, "{s}\t{t}").unwrap();
    }
    out
}

pub fn format_modules(p: &ModulePartition) -> String {
    let mut out = String::new();
    for (node, module) in p.iter() {
        writeln!(out, "{node}\t{module}").unwrap();
    }
    out
}

/// Six-decimal fixed notation.
///
/// Rust rounds the exact binary value to nearest with ties to even; a tie at
/// the sixth decimal needs an odd multiple of 5e-7, which no finite double
/// represents, so this is also round-half-even on the decimal input. A
/// negative value that rounds to zero prints as `0.000000`.
pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}
