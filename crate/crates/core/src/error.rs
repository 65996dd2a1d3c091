use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unknown divisor `{0}`")]
    UnknownDivisor(String),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("lattice mismatch: expected `{expected}`, found `{found}`")]
    LatticeMismatch { expected: String, found: String },
    #[error("effectivity undecided at search bound {0}")]
    Undecided(u64),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid lattice map: {0}")]
    InvalidMap(String),
    #[error("no lift: {0}")]
    NoLift(String),
    #[error("invalid ring presentation: {0}")]
    InvalidPresentation(String),
    #[error("ring elements belong to different presentations")]
    PresentationMismatch,
    #[error("missing integral: {0}")]
    MissingIntegral(String),
    #[error("divergent expansion: {0}")]
    Divergent(String),
    #[error("cannot continue tail: {0}")]
    NotContinuable(String),
    #[error("degenerate substitution: {0}")]
    DegenerateSubstitution(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("{roots} roots exceed the permutation search bound {bound}")]
    TooManyRoots { roots: usize, bound: usize },
    #[error("invalid enumeration caps: {0}")]
    InvalidCaps(String),
    #[error("invalid cohomology basis: {0}")]
    InvalidBasis(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid insertion: {0}")]
    InvalidInsertion(String),
    #[error("invalid table entry: {0}")]
    InvalidEntry(String),
    #[error("missing classical triple product for ({0})")]
    MissingProduct(String),
    #[error("curve class must be nonzero")]
    ZeroClass,
    #[error("nonzero invariant at {class} lies outside the admissible range")]
    VanishingViolation { class: String },
    #[error("parse error: {0}")]
    Parse(String),
}
