use thiserror::Error;

/// Errors raised by the models, the planner and the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphereError {
    #[error("matrix is not a rotation: {0}")]
    NotARotation(String),
    #[error("cannot orthonormalize a matrix with det {0} <= 0")]
    NonPositiveDeterminant(f64),
    #[error("latitude/longitude chart is singular near the pole (latitude {lat} rad)")]
    SingularChart { lat: f64 },
    #[error("trajectory breached the pole guard at arc length {s}")]
    PoleBreach { s: f64 },
    #[error("integration step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("arc length must be nonnegative, got {0}")]
    NegativeArcLength(f64),
    #[error("control schedule covers {available} of the requested {requested} arc length")]
    ScheduleTooShort { available: f64, requested: f64 },
    #[error("singular arc with zero cost multiplier: no optimal control exists")]
    AbnormalSingular,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tight radius {radius} lies outside (0, 1/2] and is not 1/sqrt(2); pass allow_out_of_domain to proceed")]
    OutOfDomain { radius: f64 },
    #[error("no candidate word reaches the goal: {0}")]
    NoSolution(String),
    #[error("invalid path word {0:?}")]
    InvalidWord(String),
}

pub type Result<T, E = SphereError> = std::result::Result<T, E>;
