use alloc::string::String;

/// Errors raised by the beamforming library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Matrix or vector dimensions disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A value violates a type contract (e.g. an infeasible analog precoder).
    #[error("contract violated: {0}")]
    Contract(String),
    /// The epsilon-constraint cannot be met; `gap` is how far the secondary
    /// objective's minimum lies above epsilon.
    #[error("epsilon constraint infeasible (gap {gap})")]
    Infeasible { gap: f64 },
    /// The solver produced a non-finite objective.
    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize },
    /// The requested solver/scalarization pairing is not supported.
    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! shape {
    ($($arg:tt)*) => { $crate::Error::Shape(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
pub(crate) use shape;
