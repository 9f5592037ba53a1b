//! Output fields, input-intensity normalisations and the one- and two-photon
//! scattering fidelities.
//!
//! Polarisation labels index the reflected output modes
//! `ξ_P(t) = i e_P†e_in η(t)/κ + e_P†A`. Spin labels refer to the Zeeman
//! eigenstates of the *reference* field (the configured external-field
//! direction), so a noise sample that tilts the field shows up as a fidelity
//! loss rather than as a change of basis.

mod one;
mod search;
pub mod two;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::engine::{AffineOp, Tolerances};
use crate::model::{zeeman_eigenstates, CavityModel, OperatorSet, PulseTrain, SpinKet, SystemConfig};
use crate::quad::integrate_fn;
use crate::{CMatrix, JonesVector, C64};

pub use one::{
    fidelity_one_photon, fidelity_one_photon_with, spin_polarization_expectation_one, spin_polarization_one,
    SpinPolarizationOne,
};
pub use search::{optimal_field, FieldOptimum};
pub use two::{fidelity_two_photon, fidelity_two_photon_with, TwoPhotonElements};

/// Linear output polarisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn jones(self) -> JonesVector {
        match self {
            Polarization::H => JonesVector::H,
            Polarization::V => JonesVector::V,
        }
    }

    fn label(self) -> char {
        match self {
            Polarization::H => 'H',
            Polarization::V => 'V',
        }
    }
}

/// Zeeman eigenstate label `φ₊` / `φ₋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Plus, Spin::Minus];

    pub fn label(self) -> char {
        match self {
            Spin::Plus => '+',
            Spin::Minus => '-',
        }
    }

    /// Computational-basis bit: `φ₊ → 0`, `φ₋ → 1`.
    pub fn bit(self) -> u8 {
        match self {
            Spin::Plus => 0,
            Spin::Minus => 1,
        }
    }

    pub fn from_bit(b: u8) -> Self {
        if b == 0 {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }
}

/// `ξ_P(t)` split into its c-number coefficient (multiplying `η(t)`) and the
/// cavity operator `e_P†A`.
#[derive(Clone, Debug)]
pub struct OutputFieldSpec {
    pub polarization: Polarization,
    pub jones: JonesVector,
    /// `i e_P†e_in / κ`.
    pub drive_coeff: C64,
    pub op: CMatrix,
}

impl OutputFieldSpec {
    pub fn new(pol: Polarization, ops: &OperatorSet, config: &SystemConfig) -> Self {
        let jones = pol.jones();
        let drive_coeff = C64::i() * jones.inner(&config.input_polarization) / config.kappa;
        OutputFieldSpec { polarization: pol, jones, drive_coeff, op: ops.projected_field(&jones.0) }
    }

    pub fn affine(&self, pulses: &PulseTrain) -> AffineOp {
        AffineOp { drive_coeff: self.drive_coeff, pulses: pulses.clone(), op: self.op.clone() }
    }
}

/// `N⁽¹⁾ = √(π/2) η₀² t₀ / κ²`.
pub fn normalization_one(config: &SystemConfig) -> f64 {
    (std::f64::consts::PI / 2.0).sqrt() * config.eta0 * config.eta0 * config.t0 / (config.kappa * config.kappa)
}

/// `N⁽²⁾(τ) = κ⁻⁴ ∫ η(t)² η(t+τ)² dt` for an arbitrary pulse train.
pub fn normalization_two_train(pulses: &PulseTrain, kappa: f64, tau: f64) -> f64 {
    let t0 = pulses.t0;
    let a = pulses.first_center() - tau - 8.0 * t0;
    let b = pulses.last_center() + 8.0 * t0;
    let n = (((b - a) / t0) * 64.0).ceil() as usize;
    let k4 = kappa.powi(4);
    integrate_fn(
        |t| {
            let (x, y) = (pulses.amplitude(t), pulses.amplitude(t + tau));
            x * x * y * y
        },
        a,
        b,
        n,
    ) / k4
}

/// `N⁽²⁾(τ)` for the two-pulse train with centres `{0, τ}`.
pub fn normalization_two(config: &SystemConfig, tau: f64) -> f64 {
    normalization_two_train(&PulseTrain::pair(config, tau), config.kappa, tau)
}

/// Which assignment of `S` elements enters `F⁽¹⁾`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexConvention {
    /// `|β|²` weights the `V φ₋` population and the cross term uses the
    /// `Hφ₊ ↔ Vφ₋` coherence.
    #[default]
    Consistent,
    /// The literal printed combination
    /// `|α|²S^{H+}_{H+} + |β|²S^{H+}_{V−} + 2Re[α*β S^{V−}_{V−}]`.
    Literal,
}

/// Target coefficients of `α|Hφ₊⟩ + β|Vφ₋⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealOne {
    pub alpha: C64,
    pub beta: C64,
}

impl Default for IdealOne {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        IdealOne { alpha: C64::new(s, 0.0), beta: C64::new(0.0, -s) }
    }
}

/// Target coefficients of
/// `α|HHφ₊⟩ + β|HVφ₋⟩ + γ|VHφ₋⟩ + δ|VVφ₊⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealTwo {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
}

impl Default for IdealTwo {
    fn default() -> Self {
        IdealTwo {
            alpha: C64::new(0.5, 0.0),
            beta: C64::new(0.0, -0.5),
            gamma: C64::new(0.0, -0.5),
            delta: C64::new(0.5, 0.0),
        }
    }
}

impl IdealTwo {
    /// `(α, β, γ, δ)`.
    pub fn as_vector(&self) -> Vector4<C64> {
        Vector4::new(self.alpha, self.beta, self.gamma, self.delta)
    }

    pub fn from_vector(v: &Vector4<C64>) -> Self {
        IdealTwo { alpha: v[0], beta: v[1], gamma: v[2], delta: v[3] }
    }
}

fn check_normalized(norm_sqr: f64) -> crate::Result<()> {
    if (norm_sqr - 1.0).abs() > 1e-9 {
        return Err(crate::Error::NotNormalized(norm_sqr.sqrt()));
    }
    Ok(())
}

/// Numerical controls shared by both fidelities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityOptions {
    pub tolerances: Tolerances,
    pub convention: IndexConvention,
    /// Output samples per shortest physical time scale
    /// `1 / max(Γ_cav, b, 1/t₀)` for the single-photon quadrature.
    pub oversample: f64,
    /// Outer-grid points per `t₀` for the two-photon regression integral.
    pub outer_points_per_t0: f64,
    /// Half-width of the two-photon outer window in units of `t₀`.
    pub outer_half_width: f64,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        FidelityOptions {
            tolerances: Tolerances::default(),
            convention: IndexConvention::Consistent,
            oversample: 8.0,
            outer_points_per_t0: 4.0,
            outer_half_width: 3.0,
        }
    }
}

/// Fidelity value with the ingredients it was assembled from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult {
    pub value: f64,
    /// Named `⟨S⟩` elements that entered the formula, as `(label, re, im)`.
    pub elements: Vec<(String, f64, f64)>,
    pub normalization: f64,
    /// Largest change of any element when the quadrature grid is halved.
    pub quadrature_check: f64,
    pub config: SystemConfig,
    pub field: crate::FieldVector,
}

/// Reference spin basis `(φ₊, φ₋)` from the configured field direction.
pub fn reference_basis(config: &SystemConfig) -> (SpinKet, SpinKet) {
    zeeman_eigenstates(config.theta, config.phi)
}

pub(crate) fn spin_ket(basis: &(SpinKet, SpinKet), s: Spin) -> SpinKet {
    match s {
        Spin::Plus => basis.0,
        Spin::Minus => basis.1,
    }
}

/// Initial state: reference `φ₊` with both cavity modes empty.
pub fn initial_state(model: &CavityModel) -> CMatrix {
    let basis = reference_basis(&model.config);
    let psi = model.ops.ground_state_ket(&basis.0);
    &psi * psi.adjoint()
}

/// A sparse observable `O` stored as `(i, j, O_ij)` for fast `Tr[ρ O]`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Observable(Vec<(usize, usize, C64)>);

impl Observable {
    pub(crate) fn from_dense(m: &CMatrix) -> Self {
        let mut v = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)].norm() > 0.0 {
                    v.push((i, j, m[(i, j)]));
                }
            }
        }
        Observable(v)
    }

    /// `Tr[ρ O] = Σ O_ij ρ_ji`.
    pub(crate) fn expect(&self, rho: &CMatrix) -> C64 {
        self.0.iter().map(|&(i, j, v)| v * rho[(j, i)]).sum()
    }
}

pub(crate) fn element_label(upper: &str, lower: &str) -> String {
    format!("S^{upper}_{lower}")
}

pub(crate) fn pol_spin_label(p: &[Polarization], s: Spin) -> String {
    let mut out: String = p.iter().map(|x| x.label()).collect();
    out.push(s.label());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn normalization_one_closed_form() {
        let mut config = SystemConfig::preset(Preset::HighQ);
        config.eta0 = 1.0;
        config.t0 = 1.0;
        config.kappa = 1.0;
        assert_relative_eq!(normalization_one(&config), (PI / 2.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(normalization_one(&config), 1.2533141373155, max_relative = 1e-12);
        let n1 = normalization_one(&config);
        config.eta0 = 2.0;
        assert_relative_eq!(normalization_one(&config), 4.0 * n1, max_relative = 1e-15);
    }

    #[test]
    fn normalization_one_matches_quadrature() {
        let config = SystemConfig::preset(Preset::HighQ);
        let pulses = PulseTrain::single(&config);
        let k = config.kappa;
        let q = integrate_fn(|t| (pulses.amplitude(t) / k).powi(2), -10.0 * config.t0, 10.0 * config.t0, 4000);
        assert_relative_eq!(q, normalization_one(&config), max_relative = 1e-10);
    }

    #[test]
    fn normalization_two_limits() {
        let config = SystemConfig::preset(Preset::HighQ);
        let single = PulseTrain::single(&config);
        // τ = 0: κ⁻⁴ η₀⁴ ∫ exp(−4t²/t₀²) = κ⁻⁴ η₀⁴ t₀ √π / 2.
        let expect = config.eta0.powi(4) * config.t0 * PI.sqrt() / 2.0 / config.kappa.powi(4);
        assert_relative_eq!(normalization_two_train(&single, config.kappa, 0.0), expect, max_relative = 1e-10);
        // Far-separated single pulse: vanishes.
        assert!(normalization_two_train(&single, config.kappa, 20.0 * config.t0) < 1e-40 * expect);
        // Pulse pair: the cross-pulse product reproduces the same overlap
        // plus a shifted-Gaussian correction from the neighbouring pulses.
        for m in [2.0, 3.0, 5.0] {
            let tau = m * config.t0;
            let n2 = normalization_two(&config, tau);
            let x: f64 = m;
            // ∫ [e(t) + e(t−τ)]² [e(t+τ) + e(t)]² with e(t) = η₀ exp(−t²/t₀²):
            // leading term e⁴, corrections of order exp(−τ²/t₀²).
            assert!(n2 > expect);
            assert!((n2 - expect) / expect < 10.0 * (-x * x / 2.0).exp());
        }
    }

    #[test]
    fn output_field_coefficients() {
        let config = SystemConfig::preset(Preset::HighQ);
        let ops = OperatorSet::new(2);
        let h = OutputFieldSpec::new(Polarization::H, &ops, &config);
        let v = OutputFieldSpec::new(Polarization::V, &ops, &config);
        assert!((h.drive_coeff - C64::new(0.0, 1.0 / config.kappa)).norm() < 1e-15);
        assert!(v.drive_coeff.norm() < 1e-15);
        let xi = h.affine(&PulseTrain::single(&config));
        assert!(xi.scalar(50.0).norm() < 1e-300);
    }

    #[test]
    fn ideal_coefficients_normalized() {
        let one = IdealOne::default();
        assert_relative_eq!(one.alpha.norm_sqr() + one.beta.norm_sqr(), 1.0, epsilon = 1e-15);
        let two = IdealTwo::default();
        let n = two.alpha.norm_sqr() + two.beta.norm_sqr() + two.gamma.norm_sqr() + two.delta.norm_sqr();
        assert_relative_eq!(n, 1.0, epsilon = 1e-15);
    }
}
