//! SWC morphology files: one sample point per line,
//! `id type x y z radius parent`, with `#` comments.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::graph::{Graph, RootedTree, SamplePoint, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwcRecord {
    pub id: i64,
    pub type_code: i32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub radius: f64,
    pub parent: i64,
}

fn parse_record(line_no: usize, line: &str) -> Result<SwcRecord, ParseError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 7 {
        return Err(ParseError::Malformed {
            line: line_no,
            reason: format!("expected 7 fields, found {}", fields.len()),
        });
    }
    let bad = |what: &str, s: &str| ParseError::Malformed {
        line: line_no,
        reason: format!("{what} `{s}` is not a number"),
    };
    let int = |what: &str, s: &str| s.parse::<i64>().map_err(|_| bad(what, s));
    let real = |what: &str, s: &str| s.parse::<f64>().map_err(|_| bad(what, s));
    Ok(SwcRecord {
        id: int("id", fields[0])?,
        type_code: fields[1].parse::<i32>().map_err(|_| bad("type", fields[1]))?,
        x: real("x", fields[2])?,
        y: real("y", fields[3])?,
        z: real("z", fields[4])?,
        radius: real("radius", fields[5])?,
        parent: int("parent", fields[6])?,
    })
}

/// Reads SWC records, skipping blank and `#` lines. Each record carries its
/// 1-based line number.
pub fn read_swc_records(text: &str) -> Result<Vec<(usize, SwcRecord)>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push((i + 1, parse_record(i + 1, line)?));
    }
    Ok(out)
}

/// Builds a rooted tree from SWC text. Vertices follow record order; the
/// record ids become graph labels and the coordinates become sample points.
pub fn parse_swc(text: &str) -> Result<RootedTree, ParseError> {
    let records = read_swc_records(text)?;
    if records.is_empty() {
        return Err(ParseError::Empty);
    }

    let mut index_of: HashMap<i64, usize> = HashMap::with_capacity(records.len());
    let mut root: Option<(usize, usize)> = None;
    for (idx, &(line, rec)) in records.iter().enumerate() {
        if index_of.insert(rec.id, idx).is_some() {
            return Err(ParseError::DuplicateId { line, id: rec.id });
        }
        if rec.parent == -1 {
            if let Some((_, first)) = root {
                return Err(ParseError::MultipleRoots { line, first });
            }
            root = Some((idx, line));
        }
    }
    let (root_idx, _) = root.ok_or(ParseError::NoRoot)?;

    let mut parent_idx = vec![usize::MAX; records.len()];
    for (idx, &(line, rec)) in records.iter().enumerate() {
        if rec.parent == -1 {
            continue;
        }
        if rec.parent == rec.id {
            return Err(ParseError::Cycle { line, id: rec.id });
        }
        match index_of.get(&rec.parent) {
            Some(&p) => parent_idx[idx] = p,
            None => return Err(ParseError::MissingParent { line, id: rec.id, parent: rec.parent }),
        }
    }

    // With one root and n-1 parent links, the links fail to form a tree
    // exactly when some record cannot reach the root.
    const UNKNOWN: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let mut state = vec![UNKNOWN; records.len()];
    state[root_idx] = DONE;
    let mut stack = Vec::new();
    for start in 0..records.len() {
        let mut cur = start;
        while state[cur] == UNKNOWN {
            state[cur] = ACTIVE;
            stack.push(cur);
            cur = parent_idx[cur];
        }
        if state[cur] == ACTIVE {
            let (line, rec) = records[cur];
            return Err(ParseError::Cycle { line, id: rec.id });
        }
        for v in stack.drain(..) {
            state[v] = DONE;
        }
    }

    let edges: Vec<(usize, usize)> = parent_idx
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != usize::MAX)
        .map(|(c, &p)| (p, c))
        .collect();
    let labels = records.iter().map(|(_, r)| r.id).collect();
    let points = records
        .iter()
        .map(|(_, r)| SamplePoint { type_code: r.type_code, x: r.x, y: r.y, z: r.z, radius: r.radius })
        .collect();
    let graph = Graph::from_edges(records.len(), &edges)?.with_labels(labels)?;
    Ok(RootedTree::new(graph, VertexId(root_idx))?.with_points(points)?)
}

/// Writes a tree as SWC, one record per vertex in index order, parents taken
/// from a traversal from the root. Missing geometry is written as zeros.
pub fn write_swc(tree: &RootedTree) -> String {
    let g = tree.graph();
    let parents = tree.parents();
    let mut out = String::from("# id type x y z radius parent\n");
    for v in g.vertices() {
        let p = tree.points().map(|pts| pts[v.0]).unwrap_or(SamplePoint {
            type_code: 0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
            radius: 0.0,
        });
        let parent = parents[v.0].map_or(-1, |u| swc_id(g, u));
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            swc_id(g, v),
            p.type_code,
            p.x,
            p.y,
            p.z,
            p.radius,
            parent
        );
    }
    out
}

// Unlabelled vertices get 1-based ids, the usual SWC convention.
fn swc_id(g: &Graph, v: VertexId) -> i64 {
    match g.labels() {
        Some(l) => l[v.0],
        None => v.0 as i64 + 1,
    }
}
