use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The dynamics constraints restricted to a column's locality support have
    /// no solution.
    #[error("locality constraints are infeasible for column {column}")]
    LocalityInfeasible { column: usize },

    /// A row has an all-zero measured-state restriction but its bound excludes 0.
    #[error("row {row} is infeasible for this state: 0 is outside [{lo}, {hi}]")]
    RowInfeasible { row: usize, lo: f64, hi: f64 },

    #[error("ADMM did not converge within {iters} iterations")]
    NotConverged {
        iters: usize,
        /// `(primal, dual)` residuals per iteration.
        history: Vec<(f64, f64)>,
    },

    #[error("MPC step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    #[error("KKT oracle failed: {0}")]
    OracleFailure(String),

    #[error("internal invariant violated: {0}")]
    Invariant(&'static str),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Strips any [`Error::AtStep`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
