//! Cell-based smoothed finite elements for 2D linear elasticity, with
//! equilibrated superconvergent patch recovery (SPR, SPR-C, SPR-X, SPR-CX) and
//! Zienkiewicz-Zhu error estimation.
//!
//! The pipeline is mesh → [`solver::assemble_and_solve`] →
//! [`recovery::recover`] → [`estimation::ErrorReport`]; [`harness`] drives it
//! from configuration files for the cylinder and L-shape benchmarks.

// Negated comparisons reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod benchmark;
pub mod elasticity;
pub mod error;
pub mod estimation;
pub mod gsif;
pub mod harness;
pub mod mesh;
pub mod quad;
pub mod recovery;
pub mod solver;

pub use error::{Error, Result};
