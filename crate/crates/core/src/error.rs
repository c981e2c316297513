use thiserror::Error;

use crate::manifold::ManifoldSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spectrum must be strictly decreasing with a_n > 0: {0:?}")]
    NonMonotoneSpectrum(Vec<f64>),
    #[error("profile A is not positive at lambda = {lambda}")]
    NonPositiveProfile { lambda: f64 },
    #[error("sign condition on the profile is violated")]
    ConditionViolated(Box<ManifoldSpec>),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("quadrature did not converge on [{lo}, {hi}] (error estimate {err:e})")]
    QuadratureFailure { lo: f64, hi: f64, err: f64 },
    #[error("metric degenerates at the branch locus (coordinates {i} and {j} coincide)")]
    DegenerateMetric { i: usize, j: usize },
    #[error("ellipsoid embedding requires the sqrt profile")]
    WrongProfile,
    #[error("spectral polynomial has non-real roots (imaginary part {imag:e})")]
    ComplexRoots { imag: f64 },
    #[error("interval [{lo}, {hi}] has a root of odd multiplicity inside")]
    SingularInterior { lo: f64, hi: f64 },
    #[error("finite difference unstable: value {value:e}, error estimate {err:e}")]
    FdUnstable { value: f64, err: f64 },
    #[error("orbit integrand near a turning point could not be resolved")]
    NearTurningPoint,
    #[error("conservation ledger exceeded: {what} drift {drift:e}")]
    ConservationBreach { what: String, drift: f64 },
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("initial Jacobi data vanishes; use the degenerate-pair chart")]
    FrameDegenerate,
    #[error("zero of y_{i} at t = {t} looks double (slope {slope:e})")]
    DoubleZeroSuspected { i: usize, t: f64, slope: f64 },
    #[error("horizon {horizon} too short: {what}")]
    NotReached { what: String, horizon: f64 },
    #[error("no common zero of the degenerate pair (min |Z| = {min_norm:e})")]
    NoCommonZero { min_norm: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("inconclusive fit: {0}")]
    InconclusiveFit(String),
    #[error("cusp count ambiguous after refinement ({0} vs {1})")]
    AmbiguousCount(usize, usize),
    #[error("unsupported dimension for this export: {0}")]
    UnsupportedDimension(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
