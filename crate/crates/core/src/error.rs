use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("Hilbert space dimension {dim} exceeds the configured limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("eigensolver did not converge (dimension {dim}, max |H_ij| = {max_abs:e})")]
    EigenNonConvergence { dim: usize, max_abs: f64 },

    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("Lamb shift is disabled on this channel")]
    LambShiftDisabled,

    #[error("zero-temperature stationary state is ill-defined: ground level is {0}-fold degenerate")]
    DegenerateGround(usize),

    #[error("emitted intensity {0:e} is below the dark-state floor; g2 is undefined")]
    DarkState(f64),

    #[error("stationary state of the Liouvillian is not unique (pivot ratio {0:e})")]
    NonUniqueStationaryState(f64),

    #[error("{what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
