use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the range where a quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    /// The n smallest weights sum to less than (n-1)/(N-1).
    #[error("infeasible design: the {n} smallest weights sum to {sum}, below the threshold {threshold} (subset {subset:?})")]
    InfeasibleDesign {
        n: usize,
        sum: String,
        threshold: String,
        subset: Vec<usize>,
    },

    #[error("label {label} out of range for a population of size {n_pop}")]
    LabelOutOfRange { label: usize, n_pop: usize },

    #[error("zero selection probability at label {0}")]
    ZeroProbability(usize),

    #[error("enumeration of {needed} tuples exceeds the cap of {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid stratum counts: {0}")]
    InvalidCounts(String),

    #[error("sampler precondition violated: {0}")]
    Precondition(String),

    #[error("rejection loop exceeded {0} proposals")]
    IterationCap(u64),

    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
