use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {0} lies on the real axis; use the boundary-value routine")]
    OnRealAxis(C64),
    #[error("argument {0} lies on the cut [0, +inf)")]
    OnCut(C64),
    #[error("X(z) has a pole-cancelling factor z^-kappa; z = 0 is only reachable as a limit")]
    ZeroArgument,
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("argument must be negative, got {0}")]
    NonNegativeArgument(f64),
    #[error("lambda-({0}) vanishes; G is undefined there")]
    ZeroDenominator(f64),
    #[error("quadrature for {what} missed its tolerance (error estimate {estimate:e})")]
    QuadratureDivergence { what: &'static str, estimate: f64 },
    #[error("omega1 = {omega1} is within the guard band of the index transition at {transition}")]
    CriticalFrequency { omega1: f64, transition: f64 },
    #[error("arg G could not be tracked continuously near mu = {0}")]
    BranchTrackingFailure(f64),
    #[error("maximization failed: {0}")]
    MaximizationFailure(&'static str),
    #[error("operation requires index {expected}, problem has index {found}")]
    WrongIndex { expected: i32, found: i32 },
    #[error("root polishing stopped with |lambda| = {0:e}")]
    RootPolishFailure(f64),
    #[error("accommodation coefficient q = {0} is too close to specular reflection")]
    SpecularLimit(f64),
    #[error("{what}: outside domain of validity ({detail})")]
    DomainOfValidity { what: &'static str, detail: String },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("outflow at x_max is {outflow:e} of the wall value; enlarge x_max")]
    TruncationTooShort { outflow: f64 },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}
