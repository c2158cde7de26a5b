//! Desk-scale laboratory for variational quantum algorithms.
//!
//! The crate is layered bottom-up:
//!
//! - [`pauli`]: Pauli strings, observables and their algebra.
//! - [`simulator`]: dense statevector simulation, sampling and a stochastic Pauli noise model.
//! - [`measurement`]: qubit-wise commuting grouping, basis rotations, shot allocation and
//!   energy estimation from counts.
//! - [`objectives`]: expectation, CVaR and Gibbs objectives over energy-labelled samples.
//! - [`optimizers`]: finite-difference gradient descent and Nelder-Mead.
//! - [`vqe`] and [`qaoa`]: the two algorithm drivers.
//! - [`mitigation`]: zero-noise extrapolation by gate folding.
//! - [`oracle`]: slow, independent reference implementations used for verification.
//!
//! Bitstrings are written with qubit 0 as the leftmost character. Amplitude index `i` stores
//! qubit `q` in bit `q` of `i`.

pub mod error;
pub mod measurement;
pub mod mitigation;
pub mod objectives;
pub mod optimizers;
pub mod oracle;
pub mod pauli;
pub mod qaoa;
mod rng;
pub mod simulator;
pub mod vqe;

pub use error::{Error, Result};
pub use rng::derive_seed;
