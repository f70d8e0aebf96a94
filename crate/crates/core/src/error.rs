use thiserror::Error;

/// Everything that can go wrong while building boxes, evaluating monogamy
/// bounds, or running the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability-table entry is more negative than the clamping floor
    /// allows. `index` is the flat position in the table.
    #[error("table entry {index} is {value:e}, below the negativity floor")]
    NegativeProbability { index: usize, value: f64 },

    /// A probability-table entry is NaN or infinite.
    #[error("table entry {index} is not a finite number")]
    NonFiniteEntry { index: usize },

    /// The outcome distribution for one combination of settings does not sum
    /// to 1. `setting` is the flat index of the offending settings block.
    #[error("outcomes for settings block {setting} sum to {sum}, expected 1")]
    Normalization { setting: usize, sum: f64 },

    /// An argument fell outside the range an operation is defined on.
    #[error("{0}")]
    Domain(String),

    /// A CHSH value was handed to a monogamy model that cannot reach it
    /// (e.g. above the quantum maximum under the quantum model).
    #[error("CHSH value {beta} is beyond this model's reach ({max})")]
    OutOfTheoryRange { beta: f64, max: f64 },

    /// Two boxes with different party counts were combined.
    #[error("boxes have different party counts")]
    ArityMismatch,

    /// A monogamy selector string did not parse.
    #[error("unrecognized monogamy selector {0:?} (expected \"ns\", \"qm\", or \"p:<exponent>\" with exponent >= 1)")]
    InvalidSelector(String),

    /// The linear program has an empty feasible region.
    #[error("linear program is infeasible")]
    Infeasible,

    /// The linear program's objective is unbounded on the feasible region.
    #[error("linear program is unbounded")]
    Unbounded,

    /// A box file could not be parsed or has the wrong shape.
    #[error("bad box file: {0}")]
    BoxFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
