use nalgebra::{Matrix4, Vector4};

use super::{
    check_normalized, element_label, initial_state, normalization_one, pol_spin_label, reference_basis, spin_ket,
    FidelityOptions, FidelityResult, IdealOne, IndexConvention, Observable, OutputFieldSpec, Polarization, Spin,
};
use crate::engine::Propagator;
use crate::error::Result;
use crate::model::{CavityModel, PulseTrain};
use crate::quad::trapezoid_with_check;
use crate::{FieldVector, SystemConfig, C64};

/// Single-photon spin–polarisation density `ρ⁽¹⁾` in the basis
/// `{Hφ₊, Vφ₋, Hφ₋, Vφ₊}`, assembled from `⟨S^{Pλ}_{P'λ'}⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinPolarizationOne {
    /// `rho[(i, j)] = ⟨S^{(j)}_{(i)}⟩`.
    pub rho: Matrix4<C64>,
    pub normalization: f64,
    pub quadrature_check: f64,
}

fn basis_index(p: Polarization, s: Spin) -> usize {
    match (p, s) {
        (Polarization::H, Spin::Plus) => 0,
        (Polarization::V, Spin::Minus) => 1,
        (Polarization::H, Spin::Minus) => 2,
        (Polarization::V, Spin::Plus) => 3,
    }
}

impl SpinPolarizationOne {
    /// `⟨S^{Pλ}_{P'λ'}⟩`.
    pub fn get(&self, p: Polarization, l: Spin, p2: Polarization, l2: Spin) -> C64 {
        self.rho[(basis_index(p2, l2), basis_index(p, l))]
    }

    /// Elements of an exact pure state `Σ c_k |k⟩` in the same basis.
    pub fn from_state(amplitudes: Vector4<C64>) -> Self {
        SpinPolarizationOne { rho: amplitudes * amplitudes.adjoint(), normalization: 1.0, quadrature_check: 0.0 }
    }

    /// Total detected intensity `Σ ⟨S^{Pλ}_{Pλ}⟩`.
    pub fn total(&self) -> f64 {
        self.rho.trace().re
    }

    /// `⟨ψ|ρ⁽¹⁾|ψ⟩` for a target `ψ` in the same basis.
    pub fn overlap(&self, target: &Vector4<C64>) -> f64 {
        (target.adjoint() * self.rho * target)[(0, 0)].re
    }

    pub fn fidelity(&self, coeffs: &IdealOne, convention: IndexConvention) -> f64 {
        use Polarization::{H, V};
        use Spin::{Minus, Plus};
        let (a, b) = (coeffs.alpha, coeffs.beta);
        let s_hp = self.get(H, Plus, H, Plus).re;
        match convention {
            IndexConvention::Consistent => {
                a.norm_sqr() * s_hp
                    + b.norm_sqr() * self.get(V, Minus, V, Minus).re
                    + 2.0 * (a.conj() * b * self.get(V, Minus, H, Plus)).re
            }
            IndexConvention::Literal => {
                a.norm_sqr() * s_hp
                    + b.norm_sqr() * self.get(H, Plus, V, Minus).re
                    + 2.0 * (a.conj() * b * self.get(V, Minus, V, Minus)).re
            }
        }
    }
}

/// Integrates `⟨ξ_P†ξ_{P'}σ_{λλ'}⟩` over the default window for every label
/// combination.
pub fn spin_polarization_one(model: &CavityModel, opts: &FidelityOptions) -> Result<SpinPolarizationOne> {
    let config = &model.config;
    let ops = &model.ops;
    let basis = reference_basis(config);
    let (t_start, t_end) = model.default_window();
    let rate = config.gamma_cav().max(model.field.magnitude_b).max(1.0 / config.t0);
    let mut n = ((t_end - t_start) * rate * opts.oversample).ceil() as usize;
    n += n % 2;
    let h = (t_end - t_start) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| t_start + h * k as f64).collect();

    let fields = Polarization::BOTH.map(|p| OutputFieldSpec::new(p, ops, config));
    let sigma = |l: Spin, l2: Spin| ops.ground_outer(&spin_ket(&basis, l), &spin_ket(&basis, l2));

    struct Term {
        row: usize,
        col: usize,
        cc: C64,
        c_left: C64,
        c_right: C64,
        o_sigma: Observable,
        o_right: Observable,
        o_left: Observable,
        o_both: Observable,
    }
    let mut terms = Vec::with_capacity(16);
    for (ip, p) in Polarization::BOTH.iter().enumerate() {
        for (ip2, p2) in Polarization::BOTH.iter().enumerate() {
            for l in Spin::BOTH {
                for l2 in Spin::BOTH {
                    let s = sigma(l, l2);
                    let (xl, xr) = (&fields[ip], &fields[ip2]);
                    terms.push(Term {
                        row: basis_index(*p2, l2),
                        col: basis_index(*p, l),
                        cc: xl.drive_coeff.conj() * xr.drive_coeff,
                        c_left: xl.drive_coeff.conj(),
                        c_right: xr.drive_coeff,
                        o_sigma: Observable::from_dense(&s),
                        o_right: Observable::from_dense(&(&xr.op * &s)),
                        o_left: Observable::from_dense(&(xl.op.adjoint() * &s)),
                        o_both: Observable::from_dense(&(xl.op.adjoint() * &xr.op * &s)),
                    });
                }
            }
        }
    }

    let mut series = vec![Vec::with_capacity(grid.len()); terms.len()];
    let mut prop = Propagator::new(model, opts.tolerances);
    let mut rho = initial_state(model);
    let pulses = &model.pulses;
    prop.run(&mut rho, t_start, &grid, |_, t, rho| {
        let eta = pulses.amplitude(t);
        for (term, out) in terms.iter().zip(series.iter_mut()) {
            let v = term.cc * (eta * eta) * term.o_sigma.expect(rho)
                + term.c_left * eta * term.o_right.expect(rho)
                + term.c_right * eta * term.o_left.expect(rho)
                + term.o_both.expect(rho);
            out.push(v);
        }
        Ok(())
    })?;

    let norm = if pulses.centers.len() == 1 {
        normalization_one(config)
    } else {
        let k = config.kappa;
        crate::quad::integrate_fn(|t| (pulses.amplitude(t) / k).powi(2), t_start, t_end, n)
    };
    let mut rho1 = Matrix4::zeros();
    let mut check: f64 = 0.0;
    for (term, s) in terms.iter().zip(&series) {
        let (v, diff) = trapezoid_with_check(h, s);
        rho1[(term.row, term.col)] = v / norm;
        check = check.max(diff.norm() / norm);
    }
    Ok(SpinPolarizationOne { rho: rho1, normalization: norm, quadrature_check: check })
}

/// `⟨S^{Pλ}_{P'λ'}⟩` for a single pulse.
pub fn spin_polarization_expectation_one(
    p: Polarization,
    l: Spin,
    p2: Polarization,
    l2: Spin,
    config: &SystemConfig,
    field: &FieldVector,
) -> Result<C64> {
    let model = CavityModel::new(config, *field, PulseTrain::single(config))?;
    Ok(spin_polarization_one(&model, &FidelityOptions::default())?.get(p, l, p2, l2))
}

pub fn fidelity_one_photon_with(
    coeffs: &IdealOne,
    config: &SystemConfig,
    field: &FieldVector,
    opts: &FidelityOptions,
) -> Result<FidelityResult> {
    check_normalized(coeffs.alpha.norm_sqr() + coeffs.beta.norm_sqr())?;
    let model = CavityModel::new(config, *field, PulseTrain::single(config))?;
    let s = spin_polarization_one(&model, opts)?;
    let value = s.fidelity(coeffs, opts.convention);
    use Polarization::{H, V};
    use Spin::{Minus, Plus};
    let labels = [(H, Plus, H, Plus), (V, Minus, V, Minus), (V, Minus, H, Plus), (H, Plus, V, Minus)];
    let elements = labels
        .iter()
        .map(|&(p, l, p2, l2)| {
            let v = s.get(p, l, p2, l2);
            (element_label(&pol_spin_label(&[p], l), &pol_spin_label(&[p2], l2)), v.re, v.im)
        })
        .collect();
    Ok(FidelityResult {
        value,
        elements,
        normalization: s.normalization,
        quadrature_check: s.quadrature_check,
        config: config.clone(),
        field: *field,
    })
}

/// `F⁽¹⁾` with default numerical options.
pub fn fidelity_one_photon(coeffs: &IdealOne, config: &SystemConfig, field: &FieldVector) -> Result<FidelityResult> {
    fidelity_one_photon_with(coeffs, config, field, &FidelityOptions::default())
}
