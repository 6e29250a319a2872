//! Travelling waves of the damped, driven sine-Gordon equation
//!
//! ```text
//! φ_tt - φ_xx + sin φ + α φ_t + γ = 0.
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod families;
pub mod ode;
pub mod phaseflow;
pub mod shooting;
pub mod soliton_fixedpoint;
pub mod verify;
pub mod washboard;

pub use error::{Error, Result};
