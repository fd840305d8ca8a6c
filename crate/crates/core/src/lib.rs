//! Exact-arithmetic laboratory for Weyl sums, mean values of exponential sums,
//! circle-method arcs and small fractional parts of polynomials.
//!
//! Real coefficients live in [`FixedReal`], a 192-bit binary fraction modulo
//! one; counts are exact integers; floating point appears only where a value
//! is passed through `e(theta) = exp(2 pi i theta)` or reported.

pub mod diophantine;
pub mod error;
pub mod expsum;
pub mod fixed;
pub mod fracsearch;
pub mod kprofile;
pub mod meanvalue;

pub use num_bigint;
pub use num_rational;

pub use error::{Error, Result};
pub use fixed::{Cutoff, Fixed, FixedReal, RealCutoff};
pub use kprofile::ExponentProfile;
