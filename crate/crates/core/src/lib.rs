//! Design and evaluation of two-stage fast-track registration studies.
//!
//! A pilot stage either earns a conditional registration (when its z-statistic
//! clears the boundary `z_f`) or not; a second stage then tests for permanent
//! registration. This crate holds the allocation-light numerical core: normal
//! special functions, adaptive quadrature and root finding, the closed-form
//! design quantities, conditional error functions and their level
//! calibration, overall power and second-stage information sizing, the
//! apply-or-waive combination strategy, and a counter-based Monte Carlo
//! oracle.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod combination;
pub mod conditional_error;
pub mod design_space;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod power_engine;

pub use error::{Error, Result};
pub use numerics::Tolerances;
