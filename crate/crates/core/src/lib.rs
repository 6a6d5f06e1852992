//! Analytic treatment of stationary random walks in the quarter plane.
//!
//! A walk is described by a [`model::StepModel`]. The pipeline assembles the
//! functional equation, studies the kernel curve ([`kernel`], [`branch`],
//! [`curve`]), turns it into a boundary value problem and solves it
//! ([`bvp`]). The [`oracle`] module provides brute-force references.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod branch;
pub mod bvp;
pub mod config;
pub mod curve;
pub mod error;
pub mod fixtures;
pub mod fourier;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod oracle;

pub use config::Tolerances;
pub use error::{Error, Result, Stage};
pub use kernel::{BiPoly, Plane, Poly};
pub use model::{StepModel, assemble_functional_equation, validate_model};
pub use num_complex::Complex64 as C64;
