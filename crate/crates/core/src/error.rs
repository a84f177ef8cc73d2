use thiserror::Error;

/// Errors raised by the model, quadrature and simulation layers.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("exponent argument {alpha} outside the open domain ({lower}, {upper})")]
    Domain { alpha: f64, lower: f64, upper: f64 },

    #[error("maturity {maturity} precedes valuation time {t}")]
    InvalidHorizon { t: f64, maturity: f64 },

    #[error("time {t} lies beyond the simulation horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("time ordering violated: s = {s} exceeds t = {t}")]
    Ordering { s: f64, t: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} within {subdivisions} subdivisions (error estimate {error_estimate:e})")]
    Convergence {
        tolerance: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("no uniform-integrability witness p found in (1, {p_limit}]")]
    WitnessNotFound { p_limit: f64 },

    #[error("simulation scheme {scheme} cannot drive a {driver} model")]
    SchemeMismatch {
        scheme: &'static str,
        driver: &'static str,
    },

    #[error("non-finite or overflowing simulation state at step {step} (t = {t})")]
    NumericalBlowup { step: usize, t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
