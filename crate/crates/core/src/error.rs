use thiserror::Error;

/// Errors raised by the solvers and constructors in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma = {gamma} is outside the admissible range {expected}")]
    GammaOutOfRange { gamma: f64, expected: &'static str },

    #[error("no singular points exist for gamma = {gamma} > 1")]
    NoSingularPoints { gamma: f64 },

    #[error("initial kinetic energy must be non-negative, got {z0}")]
    NegativeInitialEnergy { z0: f64 },

    #[error("separatrix launch requested at g0 = {g0}, which is not a maximum of the potential")]
    SingularLaunchAtNonSaddle { g0: f64 },

    #[error("kinetic energy vanishes at interior point g = {g}")]
    ZeroEnergyInInterior { g: f64 },

    #[error("curve domain [{lo}, {hi}] does not cover the required interval [{need_lo}, {need_hi}]")]
    DomainTooShort {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("iterate has vanishing action integral ({integral:e})")]
    DegenerateIterate { integral: f64 },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("operator is not provably contractive at gamma = {gamma} (lambda = {lambda})")]
    NotContractive { gamma: f64, lambda: f64 },

    #[error("no convergence after {iterations} iterations")]
    MaxIterExceeded { iterations: usize },

    #[error("shooting bracket [{lo}, {hi}] does not enclose a sign change: {reason}")]
    BracketFailure { lo: f64, hi: f64, reason: String },

    #[error("array energy z_M must be positive, got {z_m}")]
    ZmNonPositive { z_m: f64 },

    #[error("mu = {mu} must lie strictly below hat_mu = {hat_mu}")]
    MuNotBelowHatMu { mu: f64, hat_mu: f64 },

    #[error("span of {periods} periods is too short (need at least {required})")]
    SpanTooShort { periods: f64, required: f64 },

    #[error("the unit-velocity branch needs gamma > 1, got {gamma}")]
    GammaNotAboveOne { gamma: f64 },

    #[error("parameter {name} = {value} out of range: {reason}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("mu = inf selects the v = ±1 branch, which exists only for gamma > 1 (gamma = {gamma})")]
    MuInfinityRequiresGammaAboveOne { gamma: f64 },

    #[error("cannot invert the velocity map with alpha = 0")]
    AlphaZeroInverse,

    #[error("velocity {v} outside ]-1, 1[")]
    VelocityOutOfRange { v: f64 },

    #[error("xi = {xi} is outside the computed profile range")]
    OutOfProfileRange { xi: f64 },

    #[error("operation requires an array solution")]
    NotAnArray,

    #[error("evaluation grid leaves the covered range: {reason}")]
    GridOutOfRange { reason: String },

    #[error("time step {dt} violates the CFL bound for dx = {dx}")]
    CflViolation { dt: f64, dx: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable identifier used in CLI error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::GammaOutOfRange { .. } => "gamma_out_of_range",
            Error::NoSingularPoints { .. } => "no_singular_points",
            Error::NegativeInitialEnergy { .. } => "negative_initial_energy",
            Error::SingularLaunchAtNonSaddle { .. } => "singular_launch_at_non_saddle",
            Error::ZeroEnergyInInterior { .. } => "zero_energy_in_interior",
            Error::DomainTooShort { .. } => "domain_too_short",
            Error::DegenerateIterate { .. } => "degenerate_iterate",
            Error::GridMismatch => "grid_mismatch",
            Error::NotContractive { .. } => "not_contractive",
            Error::MaxIterExceeded { .. } => "max_iter_exceeded",
            Error::BracketFailure { .. } => "bracket_failure",
            Error::ZmNonPositive { .. } => "zm_non_positive",
            Error::MuNotBelowHatMu { .. } => "mu_not_below_hat_mu",
            Error::SpanTooShort { .. } => "span_too_short",
            Error::GammaNotAboveOne { .. } => "gamma_not_above_one",
            Error::ParamOutOfRange { .. } => "param_out_of_range",
            Error::MuInfinityRequiresGammaAboveOne { .. } => "mu_infinity_requires_gamma_above_one",
            Error::AlphaZeroInverse => "alpha_zero_inverse",
            Error::VelocityOutOfRange { .. } => "velocity_out_of_range",
            Error::OutOfProfileRange { .. } => "out_of_profile_range",
            Error::NotAnArray => "not_an_array",
            Error::GridOutOfRange { .. } => "grid_out_of_range",
            Error::CflViolation { .. } => "cfl_violation",
            Error::Integration(_) => "integration_failure",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// Process exit code: 3 when the method does not apply, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotContractive { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
