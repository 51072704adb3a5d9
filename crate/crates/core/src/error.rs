use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("symbol clash: `{0}` already exists with a different relation")]
    SymbolClash(String),
    #[error("empty subset")]
    EmptySubset,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("semiring mismatch: {0}")]
    SemiringMismatch(String),
    #[error("relation `{0}` is empty")]
    EmptyRelation(String),
    #[error("minor left the minion: {0}")]
    MembershipLost(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("wrong certificate kind: expected {expected}, found {found}")]
    WrongKind { expected: String, found: String },
    #[error("iteration budget of {0} pivots exhausted")]
    IterationBudget(usize),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedInput(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
