use thiserror::Error;

/// Errors raised by generator, spectrum, certificate and oracle routines.
#[derive(Error, Debug)]
pub enum QsisError {
    #[error("generator has unbounded support and no truncation radius was supplied")]
    UnboundedSupportWithoutTruncation,

    #[error("generator has unbounded support; a compactly supported window is required")]
    UnboundedSupport,

    #[error("generator {0} is not in W^{{1,p}} (discontinuous window)")]
    NotSobolev(String),

    #[error("generator {0} has no closed-form Fourier transform")]
    NoClosedFormTransform(String),

    #[error("no Fourier transform path for generator {0}")]
    NoTransformPath(String),

    #[error("generator {0} is not p-integrable for p = {1}")]
    NotIntegrable(String, f64),

    #[error("not a Riesz basis at this resolution: lower spectral bound {lower} (after tail slack) is not positive")]
    DegenerateSpectrum { lower: f64 },

    #[error("amalgam lower sum c = {0} is not positive at the working resolution")]
    AmalgamDegenerate(f64),

    #[error("frame bounds must satisfy 0 < A <= B, got A = {lower}, B = {upper}")]
    NonPositiveBounds { lower: f64, upper: f64 },

    #[error("deviation L = {0} is too large (the rect estimate needs L < 1)")]
    DeviationTooLarge(f64),

    #[error("no frame bounds available for B-spline order {order} at p = {p}; supply them or request an oracle estimate")]
    MissingBounds { order: u32, p: f64 },

    #[error("dual exponent is infinite (p = 1); the step-function estimate needs p > 1")]
    DualExponentInfinite,

    #[error("exponent p = {0} outside the admissible range for this operation")]
    ExponentOutOfRange(f64),

    #[error("index {index:?} lies outside the translation grid of radius {radius}")]
    IndexOutsideGrid { index: Vec<i64>, radius: usize },

    #[error("quadrature resolution {given} points per unit is below the minimum {minimum}")]
    GridTooCoarse { given: usize, minimum: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("Gram system is singular")]
    SingularGram,

    #[error("operation supports dimension {supported} only, got {given}")]
    UnsupportedDimension { given: usize, supported: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed specification: {0}")]
    Spec(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QsisError>;
