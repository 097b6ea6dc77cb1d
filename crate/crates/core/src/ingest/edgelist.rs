//! Plain edge lists: an optional `root <id>` line followed by `u v` pairs.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::graph::{validate_edges, Graph, RootedTree, VertexId};

/// Result of reading an edge list: acyclic input becomes a rooted tree,
/// anything with a cycle stays a general graph.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedInput {
    Tree(RootedTree),
    Graph(Graph),
}

impl ParsedInput {
    pub fn graph(&self) -> &Graph {
        match self {
            ParsedInput::Tree(t) => t.graph(),
            ParsedInput::Graph(g) => g,
        }
    }

    pub fn tree(&self) -> Option<&RootedTree> {
        match self {
            ParsedInput::Tree(t) => Some(t),
            ParsedInput::Graph(_) => None,
        }
    }

    pub fn into_tree(self) -> Option<RootedTree> {
        match self {
            ParsedInput::Tree(t) => Some(t),
            ParsedInput::Graph(_) => None,
        }
    }
}

fn parse_id(line: usize, s: &str) -> Result<i64, ParseError> {
    match s.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v),
        _ => Err(ParseError::Malformed { line, reason: format!("`{s}` is not a nonnegative integer") }),
    }
}

/// Parses an edge list. Vertex ids are mapped to dense indices in ascending id
/// order and kept as labels. The root is, in order of precedence, `root`, the
/// `root <id>` header, or the smallest id.
pub fn parse_edge_list(text: &str, root: Option<i64>) -> Result<ParsedInput, ParseError> {
    let mut header_root = None;
    let mut raw_edges: Vec<(usize, i64, i64)> = Vec::new();
    let mut ids = BTreeSet::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() == 2 && fields[0] == "root" {
            if header_root.is_some() || !raw_edges.is_empty() {
                return Err(ParseError::Malformed {
                    line: line_no,
                    reason: "`root` must be the first line and appear once".into(),
                });
            }
            header_root = Some(parse_id(line_no, fields[1])?);
            continue;
        }
        if fields.len() != 2 {
            return Err(ParseError::Malformed {
                line: line_no,
                reason: format!("expected `u v`, found {} fields", fields.len()),
            });
        }
        let u = parse_id(line_no, fields[0])?;
        let v = parse_id(line_no, fields[1])?;
        if u == v {
            return Err(ParseError::Loop { line: line_no, id: u });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(ParseError::DuplicateEdge { line: line_no, u, v });
        }
        ids.insert(u);
        ids.insert(v);
        raw_edges.push((line_no, u, v));
    }

    let root_id = root.or(header_root);
    if ids.is_empty() {
        // A lone root line describes the one-vertex tree.
        return match root_id {
            Some(r) => {
                let g = Graph::from_edges(1, &[])?.with_labels(vec![r])?;
                Ok(ParsedInput::Tree(RootedTree::new(g, VertexId(0))?))
            }
            None => Err(ParseError::Empty),
        };
    }

    let labels: Vec<i64> = ids.into_iter().collect();
    let index = |id: i64| labels.binary_search(&id).expect("id collected above");
    let edges: Vec<(usize, usize)> = raw_edges.iter().map(|&(_, u, v)| (index(u), index(v))).collect();
    let n = labels.len();
    let report = validate_edges(n, &edges);
    if !report.is_connected() {
        return Err(ParseError::Disconnected { components: report.components });
    }
    let graph = Graph::from_edges(n, &edges)?.with_labels(labels.clone())?;
    if !graph.is_tree() {
        return Ok(ParsedInput::Graph(graph));
    }
    let root_idx = match root_id {
        Some(r) => labels.binary_search(&r).map_err(|_| ParseError::UnknownRoot(r))?,
        None => 0,
    };
    Ok(ParsedInput::Tree(RootedTree::new(graph, VertexId(root_idx))?))
}

/// Edge list text for a graph, using labels as ids when present.
pub fn write_edge_list(g: &Graph, root: Option<VertexId>) -> String {
    let mut out = String::new();
    if let Some(r) = root {
        let _ = writeln!(out, "root {}", g.label(r));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", g.label(u), g.label(v));
    }
    out
}

pub fn write_tree_edge_list(t: &RootedTree) -> String {
    write_edge_list(t.graph(), Some(t.root()))
}
