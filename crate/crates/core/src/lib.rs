//! Sparse domination experiments for oscillating spectral multipliers of
//! sublaplacians on finite models of stratified groups.
//!
//! The crate is organized bottom-up: [`group`] provides the finite group models,
//! [`spectral`] the exact functional calculus of the sublaplacian,
//! [`multipliers`] the multiplier class and its decompositions, [`dyadic`] the
//! dyadic grids and sparse forms, [`weights`] Muckenhoupt characteristics and
//! weighted bounds, and [`harness`] the configuration-driven experiment runner.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod dyadic;
pub mod error;
pub mod group;
pub mod harness;
pub mod kernel_ops;
pub mod linalg;
pub mod multipliers;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};

/// Complex scalar used for functions on the group.
pub type C64 = num_complex::Complex<f64>;
