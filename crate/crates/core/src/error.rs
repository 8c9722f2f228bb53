use thiserror::Error;

/// Errors produced while building probability objects or running analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{}negative weight {value} at index {index}", row_prefix(*row))]
    NegativeWeight {
        row: Option<usize>,
        index: usize,
        value: f64,
    },

    #[error("{}non-finite weight at index {index}", row_prefix(*row))]
    NonFiniteWeight { row: Option<usize>, index: usize },

    #[error("{}weights have zero total mass", row_prefix(*row))]
    ZeroTotalMass { row: Option<usize> },

    #[error("{}distribution has an empty alphabet", row_prefix(*row))]
    EmptyAlphabet { row: Option<usize> },

    #[error("channel row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("channel has no rows")]
    EmptyChannel,

    #[error("prior has {prior} entries but channel has {rows} rows")]
    PriorChannelMismatch { prior: usize, rows: usize },

    #[error("prior is not full-support: entry {index} is zero")]
    PriorNotFullSupport { index: usize },

    #[error("{what} label list has {found} entries, expected {expected}")]
    LabelCountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("alphabet size mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("distributions have disjoint supports")]
    DisjointSupport,

    #[error("tilt parameter {0} outside [0, 1]")]
    InvalidLambda(f64),

    #[error("invalid leakage order {0:?}: expected a number >= 1 or \"inf\"")]
    InvalidOrder(String),

    #[error("row tolerance must be finite and >= 0, got {0}")]
    InvalidTolerance(f64),

    #[error("type enumeration needs n >= 1 and alphabet size >= 1 (n = {n}, m = {m})")]
    InvalidTypeSpace { n: usize, m: usize },

    #[error("{count} types exceed the enumeration limit of {limit}")]
    TooManyTypes { count: u128, limit: u64 },

    #[error("operation needs at least two channel rows")]
    SingleRowChannel,

    #[error("invalid n sequence: {0}")]
    InvalidSweep(String),

    #[error("exponent fit needs at least {needed} usable points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("every gap is at or below the floating-point floor {floor:e}")]
    AllGapsUnderflow { floor: f64 },
}

fn row_prefix(row: Option<usize>) -> String {
    match row {
        Some(r) => format!("row {r}: "),
        None => String::new(),
    }
}

impl Error {
    /// True for errors caused by the numbers themselves rather than malformed input.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::TooManyTypes { .. }
                | Error::TooFewPoints { .. }
                | Error::AllGapsUnderflow { .. }
                | Error::SingleRowChannel
                | Error::DisjointSupport
        )
    }

    pub(crate) fn in_row(self, r: usize) -> Self {
        match self {
            Error::NegativeWeight { index, value, .. } => Error::NegativeWeight {
                row: Some(r),
                index,
                value,
            },
            Error::NonFiniteWeight { index, .. } => Error::NonFiniteWeight {
                row: Some(r),
                index,
            },
            Error::ZeroTotalMass { .. } => Error::ZeroTotalMass { row: Some(r) },
            Error::EmptyAlphabet { .. } => Error::EmptyAlphabet { row: Some(r) },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
