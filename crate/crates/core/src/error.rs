use thiserror::Error;

/// Errors raised by the library. Mathematical failures (a nonvanishing Hom, a
/// failed window) are reported through result types, not through this enum.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parity violation: l + |E| must be even (l = {l}, |E| = {e})")]
    Parity { l: i64, e: u32 },
    #[error("invalid marking split: {0}")]
    Split(String),
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("non-generic weights: subset {subset:?} has weight exactly 1")]
    NonGeneric { subset: Vec<usize> },
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("weight convention mismatch: expected {expected}, found {found}")]
    Convention {
        expected: &'static str,
        found: &'static str,
    },
    #[error("window infeasible for the pair; witness stratum {stratum:?}")]
    WindowInapplicable { stratum: Vec<usize> },
    #[error("pair is outside the groups required by this operation: {0}")]
    OutsideGroups(String),
    #[error("label already belongs to the collection: {0}")]
    AlreadyMember(String),
    #[error("variant not supported here: {0}")]
    Variant(String),
    #[error("descent violation: {0}")]
    Descent(String),
    #[error("no applicable case: {0}")]
    NoCase(String),
    #[error("collection is not invariant: {0}")]
    NotInvariant(String),
    #[error("unorderable: the nonvanishing digraph has a cycle through {0:?}")]
    Cyclic(Vec<usize>),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("decomposition failure: {0}")]
    Decomposition(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
