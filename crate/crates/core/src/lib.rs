//! Simulation and analysis toolkit for a charged quantum dot in a one-sided,
//! polarisation-degenerate cavity that scatters weak coherent pulses into
//! spin–multi-photon entangled states.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, the composite QD ⊗ cavity Hilbert space and the
//!   time-dependent Hamiltonian.
//! * [`engine`]: adaptive Runge–Kutta integration of the Lindblad master
//!   equation and two-time correlators via the quantum regression theorem.
//! * [`fidelity`]: output-field operators, input-intensity normalisations and
//!   the one- and two-photon scattering fidelities.
//! * [`noise`]: quasi-static Overhauser-field sampling and seeded Monte Carlo
//!   ensembles.
//! * [`multiphoton`]: exact term-sum spin–n-photon states with frequency
//!   bookkeeping, reduced densities, measurements and GHZ certificates.
//! * [`protocols`]: the rival schemes used as benchmarks.
//!
//! Units: rates and Zeeman energies in ns⁻¹ (ħ = 1), times in ns.

pub mod engine;
pub mod error;
pub mod fidelity;
pub mod model;
pub mod multiphoton;
pub mod noise;
pub mod protocols;
pub mod quad;

pub use error::{Error, Result};
pub use model::{FieldVector, JonesVector, OperatorSet, Preset, SystemConfig};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix on the composite or qubit space.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
