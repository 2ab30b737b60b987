//! Finite-time driving of a finite-temperature transverse-field Ising ring.
//!
//! The crate builds the periodic Ising Hamiltonian
//! `H(f) = -f Σ σˣᵢ + Σ σᶻᵢ σᶻᵢ₊₁` as a dense matrix, prepares Gibbs states,
//! propagates density matrices under a time-dependent control `f_t`, and
//! evaluates three irreversibility quantifiers of the resulting process:
//! the irreversible entropy, the inner friction and the quantum volume
//! entropy. The [`dcrab`] module minimizes any of them over control pulses
//! with the dressed chopped-random-basis algorithm, and [`experiments`]
//! drives the batch sweeps exposed by the command line tool.

pub mod dcrab;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod spectral;
pub mod spin_model;
pub mod sweep;
mod symmetry;
pub mod thermo;

pub use error::{Error, Result};

/// Complex scalar used for every operator and state.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
