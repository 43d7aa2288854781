use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("nonlinearity exponent must be a positive integer, got {0}")]
    InvalidExponent(u32),

    #[error("energy outside periodic annulus: h = {h} not in ({p1}, 0)")]
    EnergyOutsideAnnulus { h: f64, p1: f64 },

    #[error("outside involution domain: u = {u} not in (0, {upper})")]
    OutsideInvolutionDomain { u: f64, upper: f64 },

    #[error("argument {u} outside ({lower}, {upper})")]
    OutsideCertificateDomain { u: f64, lower: f64, upper: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    RootNotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finder did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },

    #[error("quadrature did not converge with {nodes} nodes (last change {change:e})")]
    QuadratureNotConverged { nodes: usize, change: f64 },

    #[error("stiff or singular trajectory: step size underflow at eta = {eta}")]
    StepSizeUnderflow { eta: f64 },

    #[error("step budget of {max_steps} exhausted at eta = {eta}")]
    TooManySteps { max_steps: usize, eta: f64 },

    #[error("unbounded orbit: |u| = {u} exceeds escape radius at eta = {eta}")]
    UnboundedOrbit { eta: f64, u: f64 },

    #[error("no return to the section within eta budget {horizon}")]
    NoReturn { horizon: f64 },

    #[error(
        "bracket does not straddle a fixed point: displacement {d_lo:e} at {lo}, {d_hi:e} at {hi}"
    )]
    NoFixedPointInBracket { lo: f64, hi: f64, d_lo: f64, d_hi: f64 },

    #[error("target ratio {target} outside attainable range ({low}, {high})")]
    RatioOutOfRange { target: f64, low: f64, high: f64 },

    #[error("the three-dimensional system is singular at epsilon = 0")]
    SingularPerturbation,
}

pub type Result<T> = std::result::Result<T, Error>;
