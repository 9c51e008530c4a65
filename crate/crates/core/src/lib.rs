//! Finite-blocklength analysis of infinite constellations over
//! unconstrained fading channels.
//!
//! Capacity/dispersion closed forms live in [`scalar`] and [`mimo`]; the
//! bounds without closed forms are estimated in [`monte_carlo`]; random
//! coding exponents are in [`exponents`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod exponents;
pub mod fading;
pub mod monte_carlo;
pub mod mimo;
pub mod numeric;
pub mod scalar;

pub use error::{Error, Result};
