use crate::ode::Trajectory;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions n = {n}, m = {m}: both factors must be at least 2")]
    InvalidDimensions { n: u32, m: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step budget exhausted after {steps} steps at t = {t}")]
    StepBudgetExhausted {
        steps: usize,
        t: f64,
        trajectory: Box<Trajectory>,
    },

    #[error("tolerances not met: step size underflow at t = {t}")]
    TolerancesNotMet { t: f64, trajectory: Box<Trajectory> },

    #[error("energy increased from {from} to {to} at t = {t}, beyond the accepted drift")]
    EnergyViolation {
        t: f64,
        from: f64,
        to: f64,
        trajectory: Box<Trajectory>,
    },

    #[error("shooting seed failure: {0}")]
    SeedFailure(String),

    #[error("classification indeterminate at horizon t = {t_max}; extend t_max or tighten tolerances")]
    Indeterminate { t_max: f64 },

    #[error("no stored flat-limit constant for (n, m) = ({n}, {m})")]
    UnknownQ0 { n: u32, m: u32, q1: f64 },

    #[error(
        "tail certification failed: omitted tail contributes {tail_rel} relative to the \
         p-integral even at bracket width {width_rel}"
    )]
    TailNotCertified { tail_rel: f64, width_rel: f64 },

    #[error("certification trace inconsistent at step {step}: {detail}")]
    ArithmeticMismatch { step: u32, detail: String },

    #[error("certification stalled at step {step}: relative step size fell below 1e-12 at s = {s}")]
    Stalled { step: u32, s: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
