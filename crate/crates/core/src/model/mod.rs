//! Composite Hilbert space, operators and the time-dependent Hamiltonian.

mod config;
mod hamiltonian;
mod operators;

pub use config::{FieldVector, JonesVector, Preset, SystemConfig};
pub use hamiltonian::{
    magnetic_hamiltonian, pulse_envelope, system_hamiltonian, zeeman_eigenstates, CavityModel, PulseTrain,
};
pub use operators::{Circular, OperatorSet, QdLevel, SpinKet};
