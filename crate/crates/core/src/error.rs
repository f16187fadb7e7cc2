use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("pattern of length {pattern} is longer than word of length {word}")]
    PatternLongerThanWord { pattern: usize, word: usize },
    #[error("the identity permutation has no descent")]
    IdentityHasNoDescent,
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cannot delete an entry from a permutation of size 1")]
    CannotDeleteFromSingleton,
    #[error("first descent is not a heavy reduction pair")]
    NotHeavyReductionPair,
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("size {n} exceeds enumeration bound {max}")]
    SizeBound { n: usize, max: usize },
    #[error("graph does not come from a permutation")]
    NotFromPermutation,
    #[error("graph violates the inversion-graph transitivity law")]
    NotAnInversionGraph,
    #[error("board has {cells} cells, enumeration bound is {max}")]
    BoardTooLarge { cells: usize, max: usize },
    #[error("filling board does not match the diagram")]
    BoardMismatch,
    #[error("no convention table satisfies every anchor")]
    NoConsistentConvention,
    #[error("{} convention tables satisfy every anchor", tables.len())]
    AmbiguousConvention { tables: Vec<String> },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("search estimate {estimate} exceeds budget {budget}")]
    SearchTooLarge { estimate: u128, budget: u128 },
    #[error("matrix count {count} is not divisible by {divisor}")]
    NonDivisible { count: u128, divisor: u128 },
    #[error("permutation is not Gasharov-Reiner")]
    NotGasharovReiner,
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("convention table: {0}")]
    ConventionFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
