//! Synthetic tree families: paths, starlike trees and seeded random trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::graph::RootedTree;

/// Probability that a random tree grows from its most recent vertex instead of
/// a uniformly chosen one. Values near one give long unbranched chains.
pub const CHAIN_EXTENSION_PROBABILITY: f64 = 0.75;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSpec {
    /// `P_n` rooted at the 1-based position `root_position`.
    Path { n: usize, root_position: usize },
    /// `S(n_1, ..., n_k)` with `n_1 >= ... >= n_k` and `k >= 3`.
    Starlike { branch_lengths: Vec<usize> },
    /// `S(k.m)`: `k` branches of `m` vertices each.
    StarlikeUniform { k: usize, m: usize },
    Random { n: usize, seed: u64, spine_probability: f64 },
}

impl TreeSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let fail = |msg: String| Err(SpecError::Invalid(msg));
        match self {
            TreeSpec::Path { n, root_position } => {
                if *n == 0 {
                    return fail("path needs at least one vertex".into());
                }
                if *root_position == 0 || root_position > n {
                    return fail(format!("root position {root_position} outside 1..={n}"));
                }
            }
            TreeSpec::Starlike { branch_lengths } => {
                if branch_lengths.len() < 3 {
                    return fail(format!("starlike tree needs >= 3 branches, got {}", branch_lengths.len()));
                }
                if branch_lengths.iter().any(|&b| b == 0) {
                    return fail("branch lengths must be positive".into());
                }
                if branch_lengths.windows(2).any(|w| w[0] < w[1]) {
                    return fail("branch lengths must be nonincreasing".into());
                }
            }
            TreeSpec::StarlikeUniform { k, m } => {
                if *k < 2 || *m == 0 {
                    return fail(format!("S({k}.{m}) needs k >= 2 and m >= 1"));
                }
            }
            TreeSpec::Random { n, spine_probability, .. } => {
                if *n == 0 {
                    return fail("random tree needs at least one vertex".into());
                }
                if !(0.0..=1.0).contains(spine_probability) {
                    return fail(format!("spine probability {spine_probability} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

pub fn make(spec: &TreeSpec) -> Result<RootedTree, SpecError> {
    spec.validate()?;
    let tree = match spec {
        TreeSpec::Path { n, root_position } => path(*n, root_position - 1),
        TreeSpec::Starlike { branch_lengths } => starlike(branch_lengths),
        TreeSpec::StarlikeUniform { k, m } => starlike(&vec![*m; *k]),
        TreeSpec::Random { n, seed, spine_probability } => random_tree(*n, *seed, *spine_probability),
    };
    Ok(tree)
}

fn path(n: usize, root: usize) -> RootedTree {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    RootedTree::from_edges(n, &edges, root).expect("path is a tree")
}

// Center is vertex 0; each branch is numbered outward from the center.
fn starlike(branches: &[usize]) -> RootedTree {
    let n = 1 + branches.iter().sum::<usize>();
    let mut edges = Vec::with_capacity(n - 1);
    let mut next = 1;
    for &len in branches {
        let mut prev = 0;
        for _ in 0..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    RootedTree::from_edges(n, &edges, 0).expect("starlike is a tree")
}

/// Slot set supporting O(1) insert, remove and uniform sampling.
struct SampleSet {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl SampleSet {
    fn new(capacity: usize) -> Self {
        SampleSet { items: Vec::new(), pos: vec![usize::MAX; capacity] }
    }

    fn insert(&mut self, v: usize) {
        if self.pos[v] == usize::MAX {
            self.pos[v] = self.items.len();
            self.items.push(v);
        }
    }

    fn remove(&mut self, v: usize) {
        let p = self.pos[v];
        if p == usize::MAX {
            return;
        }
        let last = *self.items.last().expect("nonempty");
        self.items.swap_remove(p);
        if last != v {
            self.pos[last] = p;
        }
        self.pos[v] = usize::MAX;
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.gen_range(0..self.items.len())])
        }
    }
}

/// Grows a tree one vertex at a time from root 0. Each new vertex either
/// becomes a spine on a random degree-2 chain vertex (probability
/// `spine_probability`, when such a vertex exists), extends the most recent
/// tip, or attaches to a uniformly random earlier vertex.
fn random_tree(n: usize, seed: u64, spine_probability: f64) -> RootedTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut chain = SampleSet::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut tip = 0;

    for v in 1..n {
        let spine_parent = if rng.gen_bool(spine_probability) { chain.sample(&mut rng) } else { None };
        let parent = match spine_parent {
            Some(p) => p,
            None => {
                let p = if rng.gen_bool(CHAIN_EXTENSION_PROBABILITY) { tip } else { rng.gen_range(0..v) };
                tip = v;
                p
            }
        };
        edges.push((parent, v));
        degree[parent] += 1;
        degree[v] = 1;
        if parent != 0 {
            if degree[parent] == 2 {
                chain.insert(parent);
            } else {
                chain.remove(parent);
            }
        }
    }
    RootedTree::from_edges(n, &edges, 0).expect("attachment process yields a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::classify;
    use crate::graph::{VertexClass, VertexId};
    use proptest::prelude::*;

    #[test]
    fn path_six_rooted_second() {
        let t = make(&TreeSpec::Path { n: 6, root_position: 2 }).unwrap();
        assert_eq!(t.root(), VertexId(1));
        assert_eq!(t.graph().degrees(), vec![1, 2, 2, 2, 2, 1]);
    }

    #[test]
    fn uniform_starlike_s32() {
        let t = make(&TreeSpec::StarlikeUniform { k: 3, m: 2 }).unwrap();
        assert_eq!(t.n(), 7);
        assert_eq!(t.graph().degree(VertexId(0)), 3);
        assert_eq!(t.root(), VertexId(0));
        let classes = classify(&t);
        assert_eq!(classes.iter().filter(|&&c| c == VertexClass::Leaf).count(), 3);
    }

    #[test]
    fn uniform_starlike_with_two_branches_is_a_centered_path() {
        let t = make(&TreeSpec::StarlikeUniform { k: 2, m: 2 }).unwrap();
        assert_eq!(t.n(), 5);
        assert_eq!(t.graph().degrees().iter().filter(|&&d| d == 2).count(), 3);
    }

    #[test]
    fn general_starlike() {
        let t = make(&TreeSpec::Starlike { branch_lengths: vec![3, 2, 1] }).unwrap();
        assert_eq!(t.n(), 7);
        assert_eq!(t.graph().degree(VertexId(0)), 3);
        assert!(make(&TreeSpec::Starlike { branch_lengths: vec![1, 2, 3] }).is_err());
        assert!(make(&TreeSpec::Starlike { branch_lengths: vec![2, 2] }).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(make(&TreeSpec::Path { n: 0, root_position: 1 }).is_err());
        assert!(make(&TreeSpec::Path { n: 3, root_position: 4 }).is_err());
        assert!(make(&TreeSpec::StarlikeUniform { k: 1, m: 2 }).is_err());
        assert!(make(&TreeSpec::Random { n: 0, seed: 1, spine_probability: 0.1 }).is_err());
        assert!(make(&TreeSpec::Random { n: 5, seed: 1, spine_probability: 1.5 }).is_err());
    }

    #[test]
    fn random_is_deterministic() {
        let spec = TreeSpec::Random { n: 50, seed: 42, spine_probability: 0.3 };
        let a = make(&spec).unwrap();
        let b = make(&spec).unwrap();
        assert_eq!(a.graph().edges(), b.graph().edges());
        let c = make(&TreeSpec::Random { n: 50, seed: 43, spine_probability: 0.3 }).unwrap();
        assert_ne!(a.graph().edges(), c.graph().edges());
    }

    proptest! {
        #[test]
        fn uniform_starlike_shape(k in 3usize..12, m in 1usize..8) {
            let t = make(&TreeSpec::StarlikeUniform { k, m }).unwrap();
            prop_assert_eq!(t.n(), k * m + 1);
            prop_assert_eq!(t.graph().degrees().iter().filter(|&&d| d > 2).count(), 1);
        }

        #[test]
        fn random_trees_are_valid(n in 1usize..400, seed in any::<u64>(), q in 0.0f64..=1.0) {
            let t = make(&TreeSpec::Random { n, seed, spine_probability: q }).unwrap();
            prop_assert!(t.graph().validate().passes());
            prop_assert_eq!(t.graph().edge_count() + 1, n);
            if n >= 2 {
                prop_assert!(t.graph().degrees().iter().filter(|&&d| d == 1).count() >= 2);
            }
        }
    }
}
