use serde::{Deserialize, Serialize};

use super::config::{FieldVector, SystemConfig};
use super::operators::{OperatorSet, SpinKet};
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Zeeman eigenstates `(φ₊, φ₋)` of the ground doublet for a field along
/// `(θ, φ)`, expressed in the `{↑, ↓}` basis.
///
/// `φ₊ = cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩` and
/// `φ₋ = e^{−iφ} sin(θ/2)|↑⟩ − cos(θ/2)|↓⟩`; `φ₊` carries energy `+b/2`.
pub fn zeeman_eigenstates(theta: f64, phi: f64) -> (SpinKet, SpinKet) {
    let (s, c) = (theta / 2.0).sin_cos();
    let plus = SpinKet::new(C64::new(c, 0.0), C64::from_polar(s, phi));
    let minus = SpinKet::new(C64::from_polar(s, -phi), C64::new(-c, 0.0));
    (plus, minus)
}

/// `H_B = −(3/2) g̃_h b cosθ (|⇑⟩⟨⇑| − |⇓⟩⟨⇓|) + (b/2)(|φ₊⟩⟨φ₊| − |φ₋⟩⟨φ₋|)`.
///
/// Built from the electron and heavy-hole spin vectors as
/// `b n̂·S_e − g̃_h b n̂·S_h`, which is the same operator.
pub fn magnetic_hamiltonian(ops: &OperatorSet, field: &FieldVector, config: &SystemConfig) -> CMatrix {
    let n = field.direction();
    let b = field.magnitude_b;
    let mut h = CMatrix::zeros(ops.dim, ops.dim);
    for k in 0..3 {
        if n[k] != 0.0 {
            h += &ops.electron_spin[k] * C64::new(b * n[k], 0.0);
            h -= &ops.hole_spin[k] * C64::new(config.gh_over_ge * b * n[k], 0.0);
        }
    }
    h
}

/// Gaussian pulse train `η(t) = η₀ Σ_c exp[−((t − c)/t₀)²]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub eta0: f64,
    pub t0: f64,
    pub centers: Vec<f64>,
}

impl PulseTrain {
    pub fn new(eta0: f64, t0: f64, centers: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidArgument("pulse train needs at least one center".into()));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("pulse centers must be finite".into()));
        }
        Ok(PulseTrain { eta0, t0, centers })
    }

    pub fn single(config: &SystemConfig) -> Self {
        PulseTrain { eta0: config.eta0, t0: config.t0, centers: vec![0.0] }
    }

    /// Two pulses at `0` and `tau`.
    pub fn pair(config: &SystemConfig, tau: f64) -> Self {
        PulseTrain { eta0: config.eta0, t0: config.t0, centers: vec![0.0, tau] }
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.centers
            .iter()
            .map(|c| {
                let x = (t - c) / self.t0;
                (-x * x).exp()
            })
            .sum::<f64>()
            * self.eta0
    }

    pub fn first_center(&self) -> f64 {
        self.centers.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn last_center(&self) -> f64 {
        self.centers.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `η(t)` for a pulse train with the given centers.
pub fn pulse_envelope(t: f64, config: &SystemConfig, centers: &[f64]) -> Result<f64> {
    Ok(PulseTrain::new(config.eta0, config.t0, centers.to_vec())?.amplitude(t))
}

/// Everything needed to evaluate `H(t) = H₀(t) + H_B` for one field sample.
///
/// `H(t) = H_static + η(t) · D`, where `H_static = g Σ†A + H.c. + H_B` and
/// `D = e_in†A + H.c.`.
#[derive(Clone, Debug)]
pub struct CavityModel {
    pub config: SystemConfig,
    pub field: FieldVector,
    pub pulses: PulseTrain,
    pub ops: OperatorSet,
    pub h_static: CMatrix,
    pub drive: CMatrix,
}

impl CavityModel {
    pub fn new(config: &SystemConfig, field: FieldVector, pulses: PulseTrain) -> Result<Self> {
        config.validate()?;
        let ops = OperatorSet::new(config.fock_cutoff);
        let coupling = {
            let sigma_dag_a = ops.sigma_up.adjoint() * &ops.a_plus + ops.sigma_down.adjoint() * &ops.a_minus;
            let h = &sigma_dag_a * C64::new(config.g, 0.0);
            &h + h.adjoint()
        };
        let h_static = coupling + magnetic_hamiltonian(&ops, &field, config);
        let drive = {
            let d = ops.projected_field(&config.input_polarization.0);
            &d + d.adjoint()
        };
        Ok(CavityModel { config: config.clone(), field, pulses, ops, h_static, drive })
    }

    pub fn dim(&self) -> usize {
        self.ops.dim
    }

    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        &self.h_static + &self.drive * C64::new(self.pulses.amplitude(t), 0.0)
    }

    /// Default integration window `[first − 5t₀, last + 5t₀ + 10/Γ_cav]`.
    /// The tail rate is floored at `κ/100` so a nearly decoupled dot does not
    /// stretch the window without bound.
    pub fn default_window(&self) -> (f64, f64) {
        let t0 = self.config.t0;
        let rate = self.config.gamma_cav().max(1e-2 * self.config.kappa);
        (self.pulses.first_center() - 5.0 * t0, self.pulses.last_center() + 5.0 * t0 + 10.0 / rate)
    }
}

/// `H(t) = H₀(t) + H_B` for a single Gaussian pulse centred at zero.
pub fn system_hamiltonian(t: f64, config: &SystemConfig, field: &FieldVector) -> Result<CMatrix> {
    Ok(CavityModel::new(config, *field, PulseTrain::single(config))?.hamiltonian(t))
}
