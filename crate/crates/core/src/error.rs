use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("quarter index {index} is outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("maturity index {index} is outside the quoted range {first}..={last}")]
    InterpolationRange {
        index: usize,
        first: usize,
        last: usize,
    },

    #[error("the liquid market has no quotes")]
    NoMarket,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    NotComputable(String),

    /// The cutting-plane loop hit its round limit with a constraint still violated.
    #[error("superhedge refinement did not converge after {rounds} rounds (residual violation {residual:e})")]
    Convergence { rounds: usize, residual: f64 },

    /// The quoted prices admit an arbitrage, so the hedge cost is unbounded below.
    #[error("hedge cost is unbounded below: the quoted upfront prices admit an arbitrage")]
    Unbounded,

    #[error("recovery law mismatch: {0}")]
    WrongRecoveryLaw(&'static str),

    #[error("rate of return undefined: capital at risk is zero")]
    UndefinedReturn,

    #[error("linear program failed: {0}")]
    Numerical(String),

    /// A study trial failed; `seed` and `index` replay it.
    #[error("trial {index} (master seed {seed}) failed: {source}")]
    Trial {
        index: u64,
        seed: u64,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::IndexOutOfRange { .. }
                | Error::InterpolationRange { .. }
                | Error::NoMarket
                | Error::Config(_)
                | Error::NotComputable(_)
                | Error::WrongRecoveryLaw(_)
        )
    }
}
