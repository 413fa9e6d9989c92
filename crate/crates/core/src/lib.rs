//! Simulation of neutrino-like flavor oscillations with trapped-ion qubit
//! registers.
//!
//! The crate has two halves that check each other:
//! - [`theory`]: the analytic plane-wave oscillation model (mixing matrix,
//!   relativistic dispersion, exact and ultrarelativistic transition
//!   probabilities),
//! - [`encoding`] + [`engine`] + [`scenario`]: multi-qubit ion Hamiltonians
//!   whose mass blocks reproduce 1+1D Dirac dynamics, time-evolved exactly
//!   per momentum sector or in a truncated phonon Fock space, with flavor
//!   read-out that can be compared against the analytic model.
//!
//! Units: energies and couplings are frequencies in kHz, times in ms, so
//! phases accumulate as e^{-i 2π E t}.

pub mod dirac;
pub mod encoding;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod scenario;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
