//! Shared fixtures for the criterion benches.

use qdent_core::engine::{DensityOperator, Liouvillian};
use qdent_core::fidelity::initial_state;
use qdent_core::model::{CavityModel, PulseTrain};
use qdent_core::{CMatrix, Preset, SystemConfig};

/// High-Q device at `b_ext = Γ_cav`.
pub fn high_q() -> SystemConfig {
    SystemConfig::preset(Preset::HighQ)
}

pub fn model(config: &SystemConfig) -> CavityModel {
    CavityModel::new(config, config.external_field(), PulseTrain::single(config)).expect("preset is valid")
}

/// A Liouvillian and a generic full-rank state to apply it to.
pub fn liouvillian_fixture(cutoff: usize) -> (Liouvillian, CMatrix) {
    let config = SystemConfig { fock_cutoff: cutoff, ..high_q() };
    let m = model(&config);
    let n = m.dim();
    let mut rho = initial_state(&m) * qdent_core::C64::new(0.5, 0.0);
    for i in 0..n {
        rho[(i, i)] += qdent_core::C64::new(0.5 / n as f64, 0.0);
    }
    debug_assert!(DensityOperator { time: 0.0, matrix: rho.clone() }.min_eigenvalue() > 0.0);
    (Liouvillian::new(&m), rho)
}
