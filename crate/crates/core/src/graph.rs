//! Simple undirected graphs, rooted trees and the vertex classifications used
//! throughout the crate (leaf, trivial, nontrivial branch, root).

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Dense vertex index in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

/// Per-invariant outcome of checking a raw edge set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub loops: Vec<usize>,
    pub duplicate_edges: Vec<(usize, usize)>,
    pub out_of_range: Vec<(usize, usize)>,
    /// Pairs `(u, v)` where `v` lists `u` as a neighbour but not vice versa.
    pub asymmetric: Vec<(usize, usize)>,
    pub components: usize,
}

impl ValidationReport {
    pub fn is_simple(&self) -> bool {
        self.loops.is_empty() && self.duplicate_edges.is_empty() && self.out_of_range.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetric.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    pub fn passes(&self) -> bool {
        self.vertex_count > 0 && self.is_simple() && self.is_symmetric() && self.is_connected()
    }

    /// First failing invariant as an error, if any.
    pub fn into_result(self) -> Result<(), GraphError> {
        if self.vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        if let Some(&(u, v)) = self.out_of_range.first() {
            return Err(GraphError::VertexOutOfRange { u, v, n: self.vertex_count });
        }
        if let Some(&v) = self.loops.first() {
            return Err(GraphError::Loop(v));
        }
        if let Some(&(u, v)) = self.duplicate_edges.first() {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        if let Some(&(u, v)) = self.asymmetric.first() {
            return Err(GraphError::Asymmetric(u, v));
        }
        if self.components != 1 {
            return Err(GraphError::Disconnected { components: self.components });
        }
        Ok(())
    }
}

/// Checks an edge list on `n` vertices for loops, duplicates and connectivity.
pub fn validate_edges(n: usize, edges: &[(usize, usize)]) -> ValidationReport {
    let mut adjacency = vec![Vec::new(); n];
    let mut report = ValidationReport { vertex_count: n, ..Default::default() };
    for &(u, v) in edges {
        if u >= n || v >= n {
            report.out_of_range.push((u, v));
            continue;
        }
        adjacency[u].push(v);
        if u != v {
            adjacency[v].push(u);
        }
    }
    let mut partial = validate_adjacency(&adjacency);
    partial.out_of_range = report.out_of_range;
    partial
}

/// Checks a raw adjacency structure. Each undirected edge should appear in
/// both endpoint lists.
pub fn validate_adjacency(adjacency: &[Vec<usize>]) -> ValidationReport {
    let n = adjacency.len();
    let mut report = ValidationReport { vertex_count: n, ..Default::default() };
    let mut seen = vec![usize::MAX; n];
    for (u, nbrs) in adjacency.iter().enumerate() {
        for &v in nbrs {
            if v >= n {
                report.out_of_range.push((u, v));
                continue;
            }
            if v == u {
                if !report.loops.contains(&u) {
                    report.loops.push(u);
                }
                continue;
            }
            if seen[v] == u {
                if u < v {
                    report.duplicate_edges.push((u, v));
                }
            } else {
                seen[v] = u;
            }
            if !adjacency[v].contains(&u) {
                report.asymmetric.push((u, v));
            }
        }
    }
    report.components = count_components(adjacency);
    report
}

fn count_components(adjacency: &[Vec<usize>]) -> usize {
    let n = adjacency.len();
    let mut visited = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        components += 1;
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if v < n && !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    components
}

/// A simple, undirected, connected, unweighted graph on dense vertex indices.
///
/// Neighbour lists are kept sorted. Instances can only be built through
/// constructors that reject loops, repeated edges and disconnected input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    edge_count: usize,
    labels: Option<Vec<i64>>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        validate_edges(n, edges).into_result()?;
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            adjacency[u].push(VertexId(v));
            adjacency[v].push(VertexId(u));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Graph { adjacency, edge_count: edges.len(), labels: None })
    }

    /// Attaches external ids (e.g. SWC record ids), one per vertex.
    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self, GraphError> {
        if labels.len() != self.n() {
            return Err(GraphError::LabelCount { expected: self.n(), got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.0]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u.0].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n()).map(VertexId)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                if u < v.0 {
                    out.push((VertexId(u), v));
                }
            }
        }
        out
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// External id of `v`, falling back to the index itself.
    pub fn label(&self, v: VertexId) -> i64 {
        self.labels.as_ref().map_or(v.0 as i64, |l| l[v.0])
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count + 1 == self.n()
    }

    pub fn validate(&self) -> ValidationReport {
        let raw: Vec<Vec<usize>> =
            self.adjacency.iter().map(|nbrs| nbrs.iter().map(|v| v.0).collect()).collect();
        validate_adjacency(&raw)
    }
}

/// Optional per-vertex geometry carried through from morphology files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub type_code: i32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub radius: f64,
}

/// A tree with a distinguished root vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct RootedTree {
    graph: Graph,
    root: VertexId,
    points: Option<Vec<SamplePoint>>,
}

impl RootedTree {
    pub fn new(graph: Graph, root: VertexId) -> Result<Self, GraphError> {
        if root.0 >= graph.n() {
            return Err(GraphError::RootOutOfRange { root: root.0, n: graph.n() });
        }
        if !graph.is_tree() {
            return Err(GraphError::NotATree { n: graph.n(), edges: graph.edge_count() });
        }
        Ok(RootedTree { graph, root, points: None })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)], root: usize) -> Result<Self, GraphError> {
        RootedTree::new(Graph::from_edges(n, edges)?, VertexId(root))
    }

    pub fn with_points(mut self, points: Vec<SamplePoint>) -> Result<Self, GraphError> {
        if points.len() != self.graph.n() {
            return Err(GraphError::LabelCount { expected: self.graph.n(), got: points.len() });
        }
        self.points = Some(points);
        Ok(self)
    }

    #[inline]
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    #[inline]
    pub fn root(&self) -> VertexId {
        self.root
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn points(&self) -> Option<&[SamplePoint]> {
        self.points.as_deref()
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    /// Non-root vertex of degree exactly two.
    #[inline]
    pub fn is_trivial(&self, v: VertexId) -> bool {
        v != self.root && self.graph.degree(v) == 2
    }

    pub fn nontrivial_count(&self) -> usize {
        self.graph.vertices().filter(|&v| !self.is_trivial(v)).count()
    }

    /// Parent of every vertex in the BFS tree from the root (`None` for the root).
    pub fn parents(&self) -> Vec<Option<VertexId>> {
        let n = self.n();
        let mut parent = vec![None; n];
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([self.root]);
        visited[self.root.0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in self.graph.neighbors(u) {
                if !visited[v.0] {
                    visited[v.0] = true;
                    parent[v.0] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        parent
    }

    /// AHU encoding of the rooted shape; equal strings iff the rooted trees
    /// are isomorphic.
    pub fn canonical_form(&self) -> String {
        let n = self.n();
        let parent = self.parents();
        let order = bfs_order(&self.graph, self.root);
        let mut code: Vec<String> = vec![String::new(); n];
        for &v in order.iter().rev() {
            let mut kids: Vec<&str> = self
                .graph
                .neighbors(v)
                .iter()
                .filter(|c| parent[c.0] == Some(v))
                .map(|c| code[c.0].as_str())
                .collect();
            kids.sort_unstable();
            let mut s = String::with_capacity(2 + kids.iter().map(|k| k.len()).sum::<usize>());
            s.push('(');
            for k in kids {
                s.push_str(k);
            }
            s.push(')');
            code[v.0] = s;
        }
        std::mem::take(&mut code[self.root.0])
    }
}

pub(crate) fn bfs_order(g: &Graph, start: VertexId) -> Vec<VertexId> {
    let mut order = Vec::with_capacity(g.n());
    let mut visited = vec![false; g.n()];
    visited[start.0] = true;
    order.push(start);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in g.neighbors(u) {
            if !visited[v.0] {
                visited[v.0] = true;
                order.push(v);
            }
        }
    }
    order
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexClass {
    Leaf,
    Trivial,
    NontrivialBranch,
    Root,
}

pub fn classify_vertex(t: &RootedTree, v: VertexId) -> VertexClass {
    if v == t.root() {
        return VertexClass::Root;
    }
    match t.graph().degree(v) {
        1 => VertexClass::Leaf,
        2 => VertexClass::Trivial,
        _ => VertexClass::NontrivialBranch,
    }
}

/// Class of every vertex, indexed by vertex.
pub fn classify(t: &RootedTree) -> Vec<VertexClass> {
    t.graph().vertices().map(|v| classify_vertex(t, v)).collect()
}

/// Two nontrivial vertices joined by a path whose interior is all trivial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NontrivialPair {
    pub u: VertexId,
    pub v: VertexId,
    pub path: Vec<VertexId>,
}

impl NontrivialPair {
    pub fn length(&self) -> usize {
        self.path.len() - 1
    }

    pub fn interior(&self) -> &[VertexId] {
        &self.path[1..self.path.len() - 1]
    }
}

/// Every maximal trivial-interior path, once, oriented from the smaller
/// endpoint index. Sorted by `(u, v, path)`.
pub fn nontrivial_pairs(t: &RootedTree) -> Vec<NontrivialPair> {
    let g = t.graph();
    let mut pairs = Vec::new();
    if g.n() == 1 {
        return pairs;
    }
    for start in g.vertices().filter(|&v| !t.is_trivial(v)) {
        for &first in g.neighbors(start) {
            let mut path = vec![start, first];
            let mut prev = start;
            let mut cur = first;
            while t.is_trivial(cur) {
                let next = g.neighbors(cur).iter().copied().find(|&x| x != prev).expect("degree 2");
                prev = cur;
                cur = next;
                path.push(cur);
            }
            // Walked from both ends; keep the orientation starting at the
            // smaller endpoint, breaking ties (u == v cannot happen in a tree)
            // by the first step.
            let end = cur;
            let keep = match start.cmp(&end) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => path[1] < path[path.len() - 2],
            };
            if keep {
                pairs.push(NontrivialPair { u: start, v: end, path });
            }
        }
    }
    pairs.sort_by(|a, b| (a.u, a.v, &a.path).cmp(&(b.u, b.v, &b.path)));
    pairs
}
