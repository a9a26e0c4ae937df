use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("exponent must satisfy p > 1, got {0}")]
    InvalidExponent(f64),
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at r = {r}")]
    StepUnderflow { r: f64 },
    #[error("solution blew up (|u| > {limit:e}) at r = {r}")]
    BlowUp { r: f64, limit: f64 },

    #[error("negative sequence absent: the weight has no negative part")]
    NegativeSequenceAbsent,
    #[error("positive sequence absent: the weight has no positive part")]
    PositiveSequenceAbsent,
    #[error("scan budget exhausted after validating {validated} of {requested} eigenvalues")]
    ScanBudgetExhausted { validated: usize, requested: usize },
    #[error("eigenvalue {k} failed validation: {reason}")]
    EigenvalueValidation { k: usize, reason: String },

    #[error("minimizer did not converge: best quotient {best}, gradient norm {gradient_norm:e}")]
    RayleighNotConverged { best: f64, gradient_norm: f64 },

    #[error("mu = {mu} is within {distance:e} of an eigenvalue")]
    TooCloseToEigenvalue { mu: f64, distance: f64 },
    #[error("mu = {mu} lies beyond the validated range of the spectrum")]
    BeyondValidatedRange { mu: f64 },

    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("every shot in the scan had a degenerate zero")]
    DegenerateShots,

    #[error("precondition violated: {0}")]
    Precondition(String),
}
