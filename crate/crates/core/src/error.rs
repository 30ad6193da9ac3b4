use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("constellation size {0} must be a power of two and at least 4")]
    InvalidConstellationSize(usize),

    #[error("index {index} out of range for a set of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("labelling is not a bijection on 0..{0}")]
    NotABijection(usize),

    #[error("bit length {len} is not a multiple of {bits_per_branch}")]
    BitLength { len: usize, bits_per_branch: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("trellis file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid trellis: {0}")]
    InvalidTrellis(String),

    #[error("unknown catalog code `{0}`")]
    UnknownCode(String),

    #[error("paths are identical; product distance over an empty index set is undefined")]
    IdenticalPaths,

    #[error("paths carry identical {0} symbols; product distance over an empty index set is undefined")]
    EmptyIndexSet(&'static str),

    #[error("no remerging path pair found within a horizon of {0} branches")]
    HorizonTooSmall(usize),

    #[error("full-diversity condition fails: effective length of {trellis} is {effective}, unmerged length is {unmerged}")]
    DiversityCondition {
        trellis: &'static str,
        effective: usize,
        unmerged: usize,
    },

    #[error("path pair is not a minimum-diversity pair")]
    NotMinimumDiversity,

    #[error("messages must differ")]
    SameMessage,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few Monte-Carlo samples: {got} < {min}")]
    TooFewSamples { got: usize, min: usize },
}
