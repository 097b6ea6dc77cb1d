use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("loop edge at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("not a tree: {n} vertices but {edges} edges")]
    NotATree { n: usize, edges: usize },
    #[error("root {root} outside 0..{n}")]
    RootOutOfRange { root: usize, n: usize },
    #[error("expected {expected} per-vertex entries, got {got}")]
    LabelCount { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate id {id}")]
    DuplicateId { line: usize, id: i64 },
    #[error("line {line}: missing parent {parent} for id {id}")]
    MissingParent { line: usize, id: i64, parent: i64 },
    #[error("line {line}: multiple roots (first root on line {first})")]
    MultipleRoots { line: usize, first: usize },
    #[error("no root record (parent = -1)")]
    NoRoot,
    #[error("line {line}: parent links of id {id} form a cycle")]
    Cycle { line: usize, id: i64 },
    #[error("line {line}: loop edge at {id}")]
    Loop { line: usize, id: i64 },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: i64, v: i64 },
    #[error("input is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("root {0} does not appear in the edge list")]
    UnknownRoot(i64),
    #[error("input has no edges or records")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid tree spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix dimension {n} exceeds the configured cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("matrix has no rows")]
    Empty,
    #[error("window half-width must be positive, got {0}")]
    NonPositiveWindow(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} is not a root of x^2 - 3x + 1")]
    NotPlateauValue(f64),
    #[error("eigenvectors were not computed")]
    NoEigenvectors,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlateauError {
    #[error("pendant path length j must be at least 2, got {0}")]
    PathLengthTooSmall(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
