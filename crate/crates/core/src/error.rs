use thiserror::Error;

/// Errors raised across the library.
///
/// Variants are grouped by how a caller is expected to react: input
/// shape problems, numerical domain problems, and builder contract
/// violations (an activation or target that the requested construction
/// cannot handle).
#[derive(Debug, Error)]
pub enum Error {
    #[error("orbital count K = {k} outside the supported range 1..={max}")]
    Capacity { k: usize, max: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("configuration index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("orbital {orbital} out of range for K = {k}")]
    OrbitalOutOfRange { orbital: usize, k: usize },

    #[error("spin conventions differ: {0:?} vs {1:?}")]
    ConventionMismatch(crate::fockspace::SpinConvention, crate::fockspace::SpinConvention),

    #[error("non-finite value: {0}")]
    Domain(String),

    #[error("configuration has {found} electrons, ansatz expects {expected}")]
    Sector { expected: usize, found: usize },

    #[error("activation `{activation}` has no derivative of order {order} at x = {point}")]
    UnsupportedActivation { activation: String, order: usize, point: f64 },

    #[error("builder contract violated: {0}")]
    Contract(String),

    #[error("amplitude {amplitude} at index {index} is outside the activation range")]
    Range { index: usize, amplitude: f64 },

    #[error("activation `{activation}` gives a vanishing coefficient for subset {subset}; no (b, omega) found")]
    Degenerate { activation: String, subset: String },

    #[error("multiplicity {ratio:e} does not fit in 64 bits for subset {subset}; raise delta")]
    MultiplicityOverflow { ratio: f64, subset: String },

    #[error("construction produced an invalid state: {0}")]
    ConstructionBug(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by a builder precondition, activation
    /// condition or target range violation.
    pub fn is_contract(&self) -> bool {
        matches!(
            self,
            Error::Contract(_)
                | Error::Range { .. }
                | Error::Degenerate { .. }
                | Error::MultiplicityOverflow { .. }
                | Error::UnsupportedActivation { .. }
                | Error::Sector { .. }
                | Error::Domain(_)
                | Error::ConstructionBug(_)
        )
    }

    /// True for file-system and (de)serialization failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Json(_) | Error::Csv(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
