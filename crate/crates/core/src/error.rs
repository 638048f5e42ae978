use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different number fields")]
    FieldMismatch,
    #[error("interval for {what} still undecided at 10^-{digits}; asserted Q-linear independence looks false")]
    IndependenceViolation { what: String, digits: usize },
    #[error("embedding of basis element `{basis}` only known to {available} digits, {requested} requested")]
    PrecisionExhausted {
        basis: String,
        available: usize,
        requested: usize,
    },
    #[error("invalid number field: {0}")]
    InvalidField(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("phase vector is fully rational")]
    FullyRationalPhase,
    #[error("volume unsupported: {0}")]
    VolumeUnsupported(String),
    #[error("region is not decomposable into boxes: {0}")]
    NotBoxDecomposable(String),
    #[error("ratio of the two Beatty slopes is rational; use the rational partition")]
    RationalRatio,
    #[error("ratio of the two Beatty slopes is irrational")]
    IrrationalRatio,
    #[error("{0} is not representable in the declared number field")]
    FieldClosure(String),
    #[error("multiplicative function `{0}` vanishes at some positive integer")]
    VanishingFunction(String),
    #[error("phases are rationally dependent: relation lattice has basis {0:?}")]
    DependentPhases(Vec<Vec<i64>>),
    #[error("w vector rejected: {0}")]
    NoValidW(String),
    #[error("relation lattice is nontrivial; an explicit w vector is required")]
    WIsRequired,
    #[error("Bohr set has no members up to {limit} (theoretical density {density})")]
    EmptyBohrSet { limit: u64, density: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
