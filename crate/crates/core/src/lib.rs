//! Numerical core for probing many-body localization with an excited-state
//! variational eigensolver.
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! switches the embarrassingly parallel loops (trial ensembles, disorder
//! phases, trajectories) onto rayon; results are identical either way.
//!
//! Layout:
//!
//! * [`model`]: interacting Aubry-André Hamiltonian as a Pauli-string sum.
//! * [`spectra`]: exact diagonalization, level statistics, EIPR.
//! * [`circuit`] / [`statevec`]: circuit IR, statevector engine, adjoint gradients.
//! * [`ansatz`]: preparation circuit, U(1) PQC, Trotter steps, hardware-efficient ansatz.
//! * [`vqe`]: energy-variance minimization and trial ensembles.
//! * [`noise`]: depolarizing channels, density-matrix and trajectory engines.
//! * [`witness`]: eigenstate witness routes and measurement estimators.
//! * [`compile`]: variational compilation of the controlled evolution.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ansatz;
pub mod circuit;
pub mod compile;
mod error;
pub mod linalg;
pub mod model;
pub mod noise;
mod par;
pub mod rng;
pub mod spectra;
pub mod statevec;
pub mod vqe;
pub mod witness;

pub use error::{Error, Result};

/// Double-precision complex amplitude.
pub type C64 = num_complex::Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
#[cfg(test)]
pub(crate) const I: C64 = C64::new(0.0, 1.0);
