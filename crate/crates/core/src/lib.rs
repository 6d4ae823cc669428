//! Two-mode model of a Bose-Einstein condensate in a double-well trap.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, reduced units, the mean-field energy surface and
//!   its exact derivatives.
//! * [`dynamics`]: integration of the nonlinear Josephson equations,
//!   self-trapping detection and period measurement.
//! * [`bifurcation`]: fixed points, their stability, and the critical
//!   coupling at which the saddle-node fold occurs.
//! * [`fluctuation`]: harmonic-oscillator coefficients and number/phase
//!   fluctuation predictions around stable fixed points.
//! * [`quantum`]: the exact Fock-space Hamiltonian for finite N and its
//!   low-lying eigenstates.
//! * [`fit`]: log-log power-law regression used by the scaling analyses.

// `!(v > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod fluctuation;
pub mod model;
pub mod quantum;
mod tridiag;

pub use error::{Error, Result};
pub use model::{ModelParams, PhasePoint, ReducedEnergy, ReducedParams};
