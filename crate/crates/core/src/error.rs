use thiserror::Error;

/// Errors raised while constructing groups, trees, embeddings and decompositions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p must be prime (got {0})")]
    NotPrime(u64),
    #[error("modulus {0} is below the minimum of 3")]
    ModulusTooSmall(u64),
    #[error("blow-up factor must be positive")]
    ZeroBlowup,
    #[error("color {color} is not a nonzero residue mod {p}")]
    InvalidColor { color: u32, p: u32 },
    #[error("color {0} appears twice")]
    RepeatedColor(u32),
    #[error("color set is not antisymmetric: {0} and {1} are opposite")]
    SymmetricPair(u32, u32),
    #[error("loop arc at vertex {0}")]
    LoopArc(u32),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("cannot strip {requested} leaves: {reason}")]
    Strip { requested: usize, reason: String },
    #[error("tree must have at least one edge")]
    EmptyTree,
    #[error(
        "no rainbow embedding found for a tree with {k} edges mod {p}{}",
        if *in_regime { " (inside the guaranteed regime: this is a bug)" } else { " (outside the guaranteed regime p > 10, k < 3(p-1)/10)" }
    )]
    NoEmbedding { k: usize, p: u32, in_regime: bool },
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("forest leaf lands on the root image {0}")]
    RootLanding(u32),
    #[error("no distinct-sums permutation exists for the given input")]
    NoDistinctSums,
    #[error("color count mismatch: forest has {edges} edges but {colors} colors were supplied")]
    ColorCountMismatch { edges: usize, colors: usize },
    #[error("star centers are not mapped injectively")]
    CentersNotInjective,
    #[error("forest colors overlap the tree colors at {0}")]
    ColorOverlap(u32),
    #[error("star center image disagrees with the tree embedding at center {0}")]
    CenterMismatch(usize),
    #[error("k = {0} exceeds oracle bound of 4 edges")]
    OracleTooLarge(usize),
    #[error("vertex {vertex} has in-degree {indegree}, expected 2")]
    NotConflicted { vertex: u32, indegree: usize },
    #[error("matrix columns are not repeat-free")]
    ColumnRepeat,
    #[error("label {0} missing from the copy family")]
    MissingLabel(usize),
    #[error("outgoing reassignment at vertex {vertex} is not a bijection on arc ({vertex}, {target})")]
    ReassignNotBijective { vertex: u32, target: u32 },
    #[error("arc {0} is not in the Cayley digraph")]
    ArcNotInDigraph(String),
    #[error("regime violation: {0}")]
    Regime(String),
    #[error("unsupported parameters: {0}")]
    Parameters(String),
    #[error("r = {0} is even; a regular tournament needs odd order")]
    EvenTournament(u32),
    #[error("no cycle-free leaf assignment exists at coclique {0}")]
    NoLeafAssignment(u32),
    #[error("construction failed at stage {stage} after {attempts} attempts: {detail}")]
    Construction { stage: &'static str, attempts: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
