use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclic order must be at least 2, got {0}")]
    InvalidOrder(u32),
    #[error("element has {found} coordinates, group has rank {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("element {0} does not belong to the group")]
    NotInGroup(String),
    #[error("zero element in a set tested for independence")]
    ZeroInIndependentSet,
    #[error("group is too large for this operation")]
    GroupTooLarge,
    #[error("subset has {0} elements; at most 128 are supported")]
    SubsetTooLarge(usize),
    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("sequence is not a divisor")]
    NotADivisor,
    #[error("sequence is not zero-sum")]
    NotZeroSum,
    #[error("sequence support is not contained in the subset")]
    SupportOutsideSubset,
    #[error("length set must be non-empty")]
    EmptyLengthSet,
    #[error("continued fraction needs n > a >= 2 with gcd(n, a) = 1, got n = {n}, a = {a}")]
    CfPrecondition { n: u64, a: u64 },
    #[error("no closed-form catalog for group {0}")]
    UncatalogedGroup(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("parameters out of contract: {0}")]
    OutOfContract(String),
    #[error("cache I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
