use thiserror::Error;

use crate::twin::NodeId;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime in [2, 2^31)")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands live in different fields (p={left} vs p={right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("field of size {p} has fewer than {n} distinct evaluation points")]
    TooFewPoints { n: usize, p: u32 },
    #[error("evaluation points are not pairwise distinct")]
    DuplicatePoints,
    #[error("generator is not MDS: columns {columns:?} form a singular submatrix")]
    NotMds { columns: Vec<usize> },
    #[error("exhaustive MDS check is limited to n <= {limit}, got n = {n}")]
    MdsCheckTooLarge { n: usize, limit: usize },
    #[error("code parameters invalid: {0}")]
    InvalidCode(String),
    #[error("erasure decoding hit a singular submatrix at positions {0:?}")]
    SingularSubmatrix(Vec<usize>),

    #[error("payload of {len} symbols exceeds k^2 = {max}")]
    PayloadTooLarge { len: usize, max: usize },
    #[error("node {0} is out of range")]
    NodeOutOfRange(NodeId),
    #[error("need {needed} live nodes, got {got}")]
    NotEnoughLiveNodes { needed: usize, got: usize },
    #[error("all nodes must be of the same type")]
    MixedTypes,
    #[error("node {0} is not live")]
    DeadNode(NodeId),
    #[error("helper {0} has the same type as the node being repaired")]
    SameTypeHelper(NodeId),
    #[error("helper {0} holds no data")]
    EmptyHelper(NodeId),
    #[error("repair needs {needed} distinct helpers, got {got}")]
    NotEnoughHelpers { needed: usize, got: usize },
    #[error("helper {0} is not of the type opposite to the failed node")]
    WrongHelperType(NodeId),
    #[error("deployment needs k = {k} distinct seed nodes per type")]
    InsufficientSeeds { k: usize },

    #[error("payload has {got} symbols, expected {expected}")]
    BadPayloadLength { expected: usize, got: usize },
    #[error("eavesdropper budget exceeded: l1 + l2 = {l} must be < k = {k}")]
    BudgetExceeded { l: usize, k: usize },
    #[error("node {0} appears both in the storage set and the repair set")]
    OverlappingSets(NodeId),
    #[error("no repair plan for repair-observed node {0}")]
    MissingRepairPlan(NodeId),
    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("bad range: {0}")]
    BadRange(String),

    #[error("malformed scenario: {0}")]
    MalformedScenario(String),
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
