use thiserror::Error;

use crate::group::GroupElement;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown group id `{0}` (expected z1, z2 or h3)")]
    UnknownGroup(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty set where a nonempty one is required: {0}")]
    EmptySet(&'static str),

    #[error("Følner index {n} does not fit inside the window")]
    WindowTooSmall { n: usize },

    #[error("malformed probability vector: {0}")]
    MalformedDistribution(String),

    #[error("mismatched alphabets: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    #[error("measure has no table at depth {0}")]
    MissingTable(usize),

    #[error("domain escapes the configuration at {0:?}")]
    DomainEscape(GroupElement),

    #[error("disjointification precondition violated at {at:?}: {reason}")]
    Disjointify { at: GroupElement, reason: String },

    #[error("quasitiling invariant violated: {0}")]
    Tiling(String),

    #[error("marker domain does not fit inside shape: {0}")]
    MarkerDomain(String),

    #[error("dictionary degree precondition failed: {0}")]
    DegreeCondition(String),

    #[error("matching incomplete: {matched} of {needed} blocks matched")]
    MatchingIncomplete { matched: usize, needed: usize },

    #[error("missing dictionary for shape {0}")]
    MissingDictionary(usize),

    #[error("invalid codec parameters: {0}")]
    CodecParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
