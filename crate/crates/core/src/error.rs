use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Parameters outside the domain of the operation.
    #[error("invalid parameters: {0}")]
    Param(String),

    /// A design block is not a proper k-subset of the point set.
    #[error("block {block} is not a {k}-subset of the point set: {reason}")]
    BlockSize {
        block: usize,
        k: usize,
        reason: String,
    },

    /// Some t-subset is covered the wrong number of times.
    #[error("subset {subset:?} lies in {count} blocks, expected {expected}")]
    Coverage {
        subset: Vec<usize>,
        count: u64,
        expected: u64,
    },

    #[error("{erased} columns erased, code tolerates at most {max}")]
    TooManyErasures { erased: usize, max: usize },

    #[error("{failed} disks failed, layout tolerates at most {max}")]
    TooManyFailures { failed: usize, max: usize },

    /// The group's read counts are not uniform, so `τ_s` is not a single number.
    #[error("parity group is unbalanced for {s} lost columns")]
    UnbalancedGroup { s: usize },

    #[error("group and design do not fit together: {0}")]
    Mismatch(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("layout invariant violated: {0}")]
    Invariant(String),
}
