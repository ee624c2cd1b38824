//! Truncated bosonic Fock spaces over finite mode sets, with the ladder,
//! field, Bogoliubov and cubic operators and numerical checks of the
//! identities and bounds they satisfy.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod checks;
mod error;
pub mod expm;
pub mod operator;
pub mod ops;
pub mod state;
pub mod suite;

pub use basis::FockBasis;
pub use error::{FockError, Result};
pub use operator::FockOperator;
pub use state::FockVector;
pub use suite::{run_suite, SuiteConfig, SuiteReport};
