//! Linear and nonlinear analysis of chemotaxis-driven pattern formation in
//! the MOMOS soil-carbon model.
//!
//! * [`model`]: parameters, equilibrium and kinetic Jacobian.
//! * [`dispersion`]: wavenumber-resolved linearization, Turing threshold and
//!   reactivity classification.
//! * [`transient`]: amplification envelopes, peak estimates, pseudospectral
//!   abscissae and the Kreiss constant.
//! * [`scanner`]: classification of the `(q, β)` plane.
//! * [`pde`]: IMEX finite-difference simulation of the full system.

// `!(x < 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod error;
pub mod fmt;
pub mod matrix;
pub mod model;
pub mod par;
pub mod pde;
pub mod scanner;
pub mod transient;

pub use error::{Error, Result};
pub use matrix::Matrix2;
pub use model::{ChemotacticLaw, Equilibrium, ModelParams};
pub use par::Execution;
