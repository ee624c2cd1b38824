//! Numerical engine for the Gaussian fluctuation law of one-particle
//! observables in the ground state of a Bose gas in the Gross–Pitaevskii
//! regime.
//!
//! The pipeline runs bottom-up:
//!
//! * [`lattice`] enumerates the momentum modes `p = 2πn`, `n ∈ ℤ³ \ {0}`.
//! * [`scattering`] solves the radial zero-energy and Neumann problems for a
//!   repulsive potential and exposes the transforms that feed everything else.
//! * [`coefficients`] turns those into per-mode Bogoliubov data
//!   (`η_p`, `τ_p`, `μ_p`, ...).
//! * [`observables`] reduces bounded observables to Fourier data and dresses
//!   them into the vectors whose Gram matrix is the limiting covariance.
//! * [`limitlaw`] evaluates characteristic functions, densities and
//!   distribution distances of the limit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod lattice;
pub mod limitlaw;
pub mod observables;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64;
