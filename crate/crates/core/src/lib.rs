//! Rooted-tree simplification and certification of the Laplacian eigenvalue
//! plateaux at `(3 -/+ sqrt 5) / 2`.
//!
//! The pipeline is: read a tree ([`ingest`]), contract its degree-2 chains
//! ([`simplify`]), compute the Laplacian spectrum ([`spectral`]) and certify
//! the plateau multiplicities against pendant-path structure and an exact
//! integer rank ([`plateaux`], [`exact`]). [`report`] bundles these into the
//! batch, histogram and fuzzing reports behind the command-line tool.

pub mod error;
pub mod exact;
pub mod graph;
pub mod ingest;
pub mod plateaux;
pub mod report;
pub mod simplify;
pub mod spectral;

pub use error::{GraphError, ParseError, PlateauError, SpecError, SpectralError};
pub use graph::{classify, nontrivial_pairs, Graph, NontrivialPair, RootedTree, VertexClass, VertexId};
pub use simplify::{simplify, SimplificationStats, Simplified};
