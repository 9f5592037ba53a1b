//! Rival entanglement sources used as benchmarks.
//!
//! * Protocol A: coherent scattering of H photons at zero external field,
//!   run through the same master-equation pipeline.
//! * Protocol B: π-pulse excitation plus spontaneous emission in a Voigt
//!   field. Photons from different branches carry different energies, so the
//!   spin-projected photonic state dephases on the `T₂*` scale.
//! * Protocol C (linear-cluster machine) has no closed form here; the
//!   comparison table keeps an empty column for it.

use nalgebra::{Matrix4, Vector4};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{spin_polarization_one, FidelityOptions, FidelityResult, Spin, SpinPolarizationOne};
use crate::model::{CavityModel, PulseTrain};
use crate::multiphoton::{build_psi_n, SymbolicPhotonState, TermKey};
use crate::noise::{ensemble_fidelity, sample_rng, EnsembleResult, OverhauserSpec};
use crate::{FieldVector, SystemConfig, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolBParams {
    /// External Zeeman energy (ns⁻¹).
    pub b_ext: f64,
    /// Overhauser spread (ns⁻¹).
    pub delta_b: f64,
    /// Time after the spin projection (ns).
    pub t: f64,
    pub n_photons: usize,
}

impl ProtocolBParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("t must be finite and >= 0 (got {})", self.t)));
        }
        if !(self.delta_b >= 0.0 && self.delta_b.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta_b must be finite and >= 0 (got {})", self.delta_b)));
        }
        if !self.b_ext.is_finite() {
            return Err(Error::InvalidArgument("b_ext must be finite".into()));
        }
        if !(2..=3).contains(&self.n_photons) {
            return Err(Error::InvalidArgument(format!("closed forms exist for 2 or 3 photons (got {})", self.n_photons)));
        }
        Ok(())
    }
}

/// Ensemble-averaged fidelity of the spin-projected photonic state:
///
/// * `F⁽²⁾ = ½{1 + e^{−(t/T₂*)²} cos(b t)}`
/// * `F⁽³⁾ = ⅛{3 + 4e^{−(t/T₂*)²} cos(b t) + e^{−(2t/T₂*)²} cos(2b t)}`
///
/// with `e^{−(t/T₂*)²} = e^{−Δ²t²/2}`.
pub fn protocol_b_fidelity(p: &ProtocolBParams) -> Result<f64> {
    p.validate()?;
    let d1 = crate::noise::coherence_decay(p.t, p.delta_b);
    let c1 = (p.b_ext * p.t).cos();
    Ok(match p.n_photons {
        2 => 0.5 * (1.0 + d1 * c1),
        _ => {
            let d2 = crate::noise::coherence_decay(2.0 * p.t, p.delta_b);
            (3.0 + 4.0 * d1 * c1 + d2 * (2.0 * p.b_ext * p.t).cos()) / 8.0
        }
    })
}

/// Half-unit frequency offset of a Protocol B photon emitted into final spin
/// `s`: the lower Zeeman level `φ₊` receives `ω₀ − b/2`.
fn protocol_b_offset(s: Spin) -> i8 {
    match s {
        Spin::Plus => -1,
        Spin::Minus => 1,
    }
}

/// Spin–photon state after `n` π-pulse excitations from `φ₊`. An `H` photon
/// leaves the spin alone, a `V` photon flips it; all branches have equal
/// weight.
pub fn protocol_b_state(n: usize) -> Result<SymbolicPhotonState> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!("Protocol B states are built for 1..=3 photons (got {n})")));
    }
    let amp = C64::new(0.5f64.powf(n as f64 / 2.0), 0.0);
    let mut terms = Vec::with_capacity(1 << n);
    for bits in 0u32..(1 << n) {
        let mut spin = Spin::Plus;
        let mut freq = Vec::with_capacity(n);
        for j in 0..n {
            if (bits >> j) & 1 == 1 {
                spin = if spin == Spin::Plus { Spin::Minus } else { Spin::Plus };
            }
            freq.push(protocol_b_offset(spin));
        }
        terms.push((TermKey { spin, bits, freq }, amp));
    }
    SymbolicPhotonState::from_terms(n, false, terms)
}

/// Born-weighted average of the branch fidelities after a spin projection.
/// Normalised by the summed weight so single-class branches give exactly 1.
fn branch_average(branches: &[(SymbolicPhotonState, f64)], b: f64, t: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (proj, w) in branches {
        num += w * proj.evolution_fidelity(b, t)?;
        den += w;
    }
    Ok(num / den)
}

fn spin_branches(state: &SymbolicPhotonState) -> Result<Vec<(SymbolicPhotonState, f64)>> {
    let mut out = Vec::with_capacity(2);
    for s in Spin::BOTH {
        match state.project_spin(s) {
            Ok(b) => out.push(b),
            Err(Error::ZeroProbability) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `Σ_s p_s f_s` for the spin-projected states at total Zeeman energy `b`.
pub fn projected_fidelity(state: &SymbolicPhotonState, b: f64, t: f64) -> Result<f64> {
    branch_average(&spin_branches(state)?, b, t)
}

/// Monte Carlo estimate of [`protocol_b_fidelity`]: Gaussian `b_N` shifts,
/// each scored by projecting the symbolic Protocol B state on both spin
/// outcomes and free-evolving the photons.
pub fn protocol_b_fidelity_mc(p: &ProtocolBParams, n_samples: usize, seed: u64) -> Result<EnsembleResult> {
    p.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    let branches = spin_branches(&protocol_b_state(p.n_photons)?)?;
    let mut rng = sample_rng(seed, 0);
    let mut values = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let z: f64 = StandardNormal.sample(&mut rng);
        values.push(branch_average(&branches, p.b_ext + p.delta_b * z, p.t)?);
    }
    EnsembleResult::from_values(values, seed, 0)
}

/// Protocol A configuration: same device at zero external field.
pub fn protocol_a_config(config: &SystemConfig) -> SystemConfig {
    SystemConfig { b_ext: 0.0, ..config.clone() }
}

/// Single-photon spin–polarisation density for one total field.
pub fn protocol_a_density(config: &SystemConfig, field: &FieldVector, opts: &FidelityOptions) -> Result<SpinPolarizationOne> {
    let model = CavityModel::new(config, *field, PulseTrain::single(config))?;
    spin_polarization_one(&model, opts)
}

/// Default Protocol A target: the noise-free scattered density of the same
/// device, trace-normalised, in the basis `{Hφ₊, Vφ₋, Hφ₋, Vφ₊}`.
pub fn protocol_a_target(config: &SystemConfig, opts: &FidelityOptions) -> Result<Matrix4<C64>> {
    let c = protocol_a_config(config);
    let rho = protocol_a_density(&c, &c.external_field(), opts)?.rho;
    let tr = rho.trace().re;
    if !(tr > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok(rho / C64::new(tr, 0.0))
}

/// `|ψ⟩⟨ψ|` for a pure override target.
pub fn pure_target(psi: &Vector4<C64>) -> Result<Matrix4<C64>> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm));
    }
    Ok(psi * psi.adjoint())
}

/// Square root of a positive semidefinite matrix; eigenvalues below
/// `1e-14·λ_max` are treated as zero so rounding noise does not leak in as
/// `√ε`.
fn hermitian_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = m.symmetric_eigen();
    let cut = 1e-14 * eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C64::new(if l > cut { l.sqrt() } else { 0.0 }, 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `(Tr√(√σ ρ √σ))²` with `σ` the unit-trace target and `ρ` the scattered
/// density normalised to the input intensity, so photon loss lowers the
/// score. Equals `⟨ψ|ρ|ψ⟩` for a pure target.
pub fn target_fidelity(target: &Matrix4<C64>, rho: &Matrix4<C64>) -> f64 {
    let s = hermitian_sqrt(target);
    let inner = &s * rho * &s;
    let inner = (inner + inner.adjoint()) * C64::new(0.5, 0.0);
    hermitian_sqrt(&inner).trace().re.powi(2)
}

/// Protocol A `F⁽¹⁾` for one total field.
pub fn protocol_a_fidelity(
    config: &SystemConfig,
    field: &FieldVector,
    target: &Matrix4<C64>,
    opts: &FidelityOptions,
) -> Result<FidelityResult> {
    let tr = target.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::NotNormalized(tr.norm()));
    }
    let c = protocol_a_config(config);
    let s = protocol_a_density(&c, field, opts)?;
    let elements = ["Hφ₊", "Vφ₋", "Hφ₋", "Vφ₊"]
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("rho_{l}"), s.rho[(i, i)].re, 0.0))
        .collect();
    Ok(FidelityResult {
        value: target_fidelity(target, &s.rho),
        elements,
        normalization: s.normalization,
        quadrature_check: s.quadrature_check,
        config: c,
        field: *field,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolAResult {
    /// Target density, row-major.
    pub target: Vec<C64>,
    pub ensemble: EnsembleResult,
}

/// Protocol A ensemble `F⁽¹⁾`: `b_ext` forced to zero, fields drawn from
/// `spec`, scored against `target` (default [`protocol_a_target`]).
pub fn protocol_a_experiment(
    config: &SystemConfig,
    spec: &OverhauserSpec,
    n_samples: usize,
    seed: u64,
    target: Option<Matrix4<C64>>,
    opts: &FidelityOptions,
) -> Result<ProtocolAResult> {
    let c = protocol_a_config(config);
    let target = match target {
        Some(t) => t,
        None => protocol_a_target(&c, opts)?,
    };
    let ensemble = ensemble_fidelity(&c, spec, n_samples, seed, |field| {
        Ok(protocol_a_fidelity(&c, field, &target, opts)?.value)
    })?;
    Ok(ProtocolAResult { target: target.transpose().iter().copied().collect(), ensemble })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonParams {
    pub b_ext: f64,
    pub delta_b: f64,
    pub n_photons: usize,
    /// Monte Carlo samples per time point for Protocol B; `0` skips it.
    pub mc_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    /// Present scheme, from the energy classes of its projected states.
    pub f_present: f64,
    pub f_b_analytic: f64,
    pub f_b_mc: Option<f64>,
    pub f_b_mc_std_error: Option<f64>,
    /// Linear-cluster machine; not modelled.
    pub f_c: Option<f64>,
}

/// Post-projection photonic fidelity against time for the present scheme and
/// Protocol B.
pub fn present_vs_b_comparison(t_grid: &[f64], params: &ComparisonParams) -> Result<Vec<ComparisonRow>> {
    let branches = spin_branches(&build_psi_n(params.n_photons)?)?;
    t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let p = ProtocolBParams { b_ext: params.b_ext, delta_b: params.delta_b, t, n_photons: params.n_photons };
            let f_b_analytic = protocol_b_fidelity(&p)?;
            let f_present = branch_average(&branches, params.b_ext, t)?;
            let (f_b_mc, f_b_mc_std_error) = if params.mc_samples > 0 {
                let e = protocol_b_fidelity_mc(&p, params.mc_samples, params.seed.wrapping_add(i as u64))?;
                (Some(e.mean), Some(e.std_error()))
            } else {
                (None, None)
            };
            Ok(ComparisonRow { t, f_present, f_b_analytic, f_b_mc, f_b_mc_std_error, f_c: None })
        })
        .collect()
}
