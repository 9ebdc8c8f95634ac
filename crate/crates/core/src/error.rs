use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} is outside its domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// The spectral distribution diverges at the origin (sub-Ohmic families);
    /// the divergence is integrable and handled by the quadrature drivers.
    #[error("spectral distribution is integrable-singular at omega = {omega}")]
    IntegrableSingular { omega: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         value {value:e}, error estimate {error:e} > tolerance {tolerance:e}"
    )]
    Convergence {
        value: f64,
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("fringe formula outside its validity: heating N = {heating}, denominator {denominator} <= 0")]
    RegimeValidity { heating: f64, denominator: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("bisection failed to refine root in [{lo}, {hi}], residual {residual:e}")]
    RootRefinement { lo: f64, hi: f64, residual: f64 },

    #[error("Fock truncation violated at t = {time}: {detail}")]
    Truncation { time: f64, detail: String },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("fringe visibility undefined at t = {time}: {detail}")]
    UndefinedVisibility { time: f64, detail: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
