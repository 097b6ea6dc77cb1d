//! Tree simplification: every chain of trivial (non-root, degree-2) vertices
//! between two nontrivial vertices is cut down to a single vertex, so paths
//! between neighbouring nontrivial vertices end up with length one (spines)
//! or two. The root and its neighbours are never removed.

use serde::Serialize;

use crate::graph::{Graph, RootedTree, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplificationStats {
    pub original_vertex_count: usize,
    pub simplified_vertex_count: usize,
    pub removed_count: usize,
    pub reduction_percent: f64,
    pub nontrivial_count_before: usize,
    pub nontrivial_count_after: usize,
}

#[derive(Clone, Debug)]
pub struct Simplified {
    pub tree: RootedTree,
    pub stats: SimplificationStats,
    /// Original index of each surviving vertex, indexed by new index.
    pub kept: Vec<VertexId>,
}

impl Simplified {
    /// New index of an original vertex, if it survived.
    pub fn new_index(&self, original: VertexId) -> Option<VertexId> {
        self.kept.binary_search(&original).ok().map(VertexId)
    }
}

pub fn simplify(t: &RootedTree) -> Simplified {
    let g = t.graph();
    let n = g.n();
    let root = t.root().index();
    let mut adj: Vec<Vec<usize>> = g.vertices().map(|v| g.neighbors(v).iter().map(|u| u.index()).collect()).collect();
    let mut deleted = vec![false; n];

    for v in 0..n {
        if v == root || deleted[v] || adj[v].len() != 2 {
            continue;
        }
        let (mut u, mut w) = (adj[v][0], adj[v][1]);
        if u > w {
            std::mem::swap(&mut u, &mut w);
        }
        if u == root || w == root {
            continue;
        }
        // Coalescing v into either degree-2 neighbour gives the same result:
        // v disappears and u, w become adjacent.
        if adj[u].len() == 2 || adj[w].len() == 2 {
            replace(&mut adj[u], v, w);
            replace(&mut adj[w], v, u);
            adj[v].clear();
            deleted[v] = true;
        }
    }

    let kept: Vec<VertexId> = (0..n).filter(|&v| !deleted[v]).map(VertexId).collect();
    let mut new_index = vec![usize::MAX; n];
    for (i, v) in kept.iter().enumerate() {
        new_index[v.index()] = i;
    }
    let mut edges = Vec::with_capacity(kept.len().saturating_sub(1));
    for &v in &kept {
        for &u in &adj[v.index()] {
            if v.index() < u {
                edges.push((new_index[v.index()], new_index[u]));
            }
        }
    }
    let mut graph = Graph::from_edges(kept.len(), &edges).expect("simplification keeps the tree connected");
    if let Some(labels) = g.labels() {
        graph = graph.with_labels(kept.iter().map(|v| labels[v.index()]).collect()).expect("label count");
    }
    let mut tree = RootedTree::new(graph, VertexId(new_index[root])).expect("simplification keeps a tree");
    if let Some(points) = t.points() {
        tree = tree.with_points(kept.iter().map(|v| points[v.index()]).collect()).expect("point count");
    }
    let stats = reduction_stats(t, &tree);
    Simplified { tree, stats, kept }
}

fn replace(list: &mut [usize], from: usize, to: usize) {
    if let Some(slot) = list.iter_mut().find(|x| **x == from) {
        *slot = to;
    }
}

/// Vertex-count reduction from `before` to `after`.
pub fn reduction_stats(before: &RootedTree, after: &RootedTree) -> SimplificationStats {
    let mut stats = counts_reduction(before.n(), after.n());
    stats.nontrivial_count_before = before.nontrivial_count();
    stats.nontrivial_count_after = after.nontrivial_count();
    stats
}

/// Reduction figures from raw vertex counts; nontrivial counts left at zero.
pub fn counts_reduction(original: usize, simplified: usize) -> SimplificationStats {
    let removed = original.saturating_sub(simplified);
    SimplificationStats {
        original_vertex_count: original,
        simplified_vertex_count: simplified,
        removed_count: removed,
        reduction_percent: if original == 0 { 0.0 } else { 100.0 * removed as f64 / original as f64 },
        nontrivial_count_before: 0,
        nontrivial_count_after: 0,
    }
}

/// A property of the simplified tree that failed to hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum SimplifyViolation {
    InvalidTree,
    NotIdempotent,
    NontrivialCountChanged { before: usize, after: usize },
    DegreeChanged { vertex: VertexId, before: usize, after: usize },
    RootRemoved,
    RootNeighbourRemoved { vertex: VertexId },
    SpineLost { branch: VertexId, leaf: VertexId },
    AdjacentTrivial { u: VertexId, v: VertexId },
    ChainNotContracted { u: VertexId, v: VertexId, interior_before: usize, interior_after: usize },
}

impl SimplifyViolation {
    pub fn name(&self) -> &'static str {
        match self {
            SimplifyViolation::InvalidTree => "invalid_tree",
            SimplifyViolation::NotIdempotent => "not_idempotent",
            SimplifyViolation::NontrivialCountChanged { .. } => "nontrivial_count_changed",
            SimplifyViolation::DegreeChanged { .. } => "degree_changed",
            SimplifyViolation::RootRemoved => "root_removed",
            SimplifyViolation::RootNeighbourRemoved { .. } => "root_neighbour_removed",
            SimplifyViolation::SpineLost { .. } => "spine_lost",
            SimplifyViolation::AdjacentTrivial { .. } => "adjacent_trivial",
            SimplifyViolation::ChainNotContracted { .. } => "chain_not_contracted",
        }
    }
}

/// Checks every structural promise of `simplify` for one input. Vertex ids in
/// the report refer to the original tree.
pub fn audit(original: &RootedTree, s: &Simplified) -> Vec<SimplifyViolation> {
    use crate::graph::nontrivial_pairs;

    let mut out = Vec::new();
    let g = original.graph();
    let h = s.tree.graph();
    if !h.validate().passes() || !h.is_tree() {
        out.push(SimplifyViolation::InvalidTree);
        return out;
    }

    let again = simplify(&s.tree);
    if again.tree.graph() != h || again.tree.root() != s.tree.root() {
        out.push(SimplifyViolation::NotIdempotent);
    }

    if s.stats.nontrivial_count_before != s.stats.nontrivial_count_after {
        out.push(SimplifyViolation::NontrivialCountChanged {
            before: s.stats.nontrivial_count_before,
            after: s.stats.nontrivial_count_after,
        });
    }

    let root = original.root();
    match s.new_index(root) {
        Some(r) if r == s.tree.root() => {}
        _ => out.push(SimplifyViolation::RootRemoved),
    }
    for &u in g.neighbors(root) {
        if s.new_index(u).is_none() {
            out.push(SimplifyViolation::RootNeighbourRemoved { vertex: u });
        }
    }

    for v in g.vertices().filter(|&v| !original.is_trivial(v)) {
        match s.new_index(v) {
            Some(nv) if h.degree(nv) == g.degree(v) => {}
            Some(nv) => out.push(SimplifyViolation::DegreeChanged { vertex: v, before: g.degree(v), after: h.degree(nv) }),
            None => out.push(SimplifyViolation::DegreeChanged { vertex: v, before: g.degree(v), after: 0 }),
        }
    }

    for leaf in g.vertices().filter(|&v| g.degree(v) == 1) {
        let branch = g.neighbors(leaf)[0];
        if g.degree(branch) < 3 {
            continue;
        }
        let kept = matches!((s.new_index(branch), s.new_index(leaf)), (Some(a), Some(b)) if h.has_edge(a, b));
        if !kept {
            out.push(SimplifyViolation::SpineLost { branch, leaf });
        }
    }

    for (a, b) in h.edges() {
        if s.tree.is_trivial(a) && s.tree.is_trivial(b) {
            out.push(SimplifyViolation::AdjacentTrivial { u: s.kept[a.index()], v: s.kept[b.index()] });
        }
    }

    let after: std::collections::HashMap<(VertexId, VertexId), usize> = nontrivial_pairs(&s.tree)
        .into_iter()
        .map(|p| {
            let (a, b) = (s.kept[p.u.index()], s.kept[p.v.index()]);
            ((a.min(b), a.max(b)), p.interior().len())
        })
        .collect();
    for p in nontrivial_pairs(original) {
        let before = p.interior().len();
        let want = before.min(1);
        let got = after.get(&(p.u.min(p.v), p.u.max(p.v))).copied();
        if got != Some(want) {
            out.push(SimplifyViolation::ChainNotContracted {
                u: p.u,
                v: p.v,
                interior_before: before,
                interior_after: got.unwrap_or(usize::MAX),
            });
        }
    }
    out
}
