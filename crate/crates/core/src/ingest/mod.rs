//! Tree input: SWC morphologies, edge lists and synthetic families.

mod edgelist;
mod swc;
mod synth;

pub use edgelist::{parse_edge_list, write_edge_list, write_tree_edge_list, ParsedInput};
pub use swc::{parse_swc, read_swc_records, write_swc, SwcRecord};
pub use synth::{make, TreeSpec, CHAIN_EXTENSION_PROBABILITY};
