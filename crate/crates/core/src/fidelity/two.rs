use super::{
    check_normalized, element_label, initial_state, normalization_two_train, pol_spin_label, reference_basis,
    spin_ket, FidelityOptions, FidelityResult, IdealTwo, OutputFieldSpec, Polarization, Spin,
};
use crate::engine::{
    correlate_with_states, sample_states, AffineOp, CorrelatorRequest, TimeDependentOperator,
};
use crate::error::{Error, Result};
use crate::model::{CavityModel, PulseTrain};
use crate::quad::trapezoid_with_check;
use crate::{CMatrix, FieldVector, SystemConfig, C64};
use nalgebra::Matrix4;

use Polarization::{H, V};
use Spin::{Minus, Plus};

/// `ξ_Q† σ ξ_{Q'}` at one time.
struct Sandwich<'a> {
    left: &'a AffineOp,
    sigma: CMatrix,
    right: &'a AffineOp,
}

impl TimeDependentOperator for Sandwich<'_> {
    fn at(&self, t: f64) -> CMatrix {
        self.left.at(t).adjoint() * &self.sigma * self.right.at(t)
    }
}

/// Labels `(P, Q, λ ; P', Q', λ')` of `⟨S^{PQλ}_{P'Q'λ'}⟩`.
type Label = (Polarization, Polarization, Spin, Polarization, Polarization, Spin);

/// The ten elements entering `F⁽²⁾`, in formula order: four populations
/// `HH+, HV−, VH−, VV+`, then the coherences
/// `(HV−|HH+), (VV+|VH−), (VH−|HH+), (VV+|HH+), (VH−|HV−), (VV+|HV−)`.
pub const TWO_PHOTON_LABELS: [Label; 10] = [
    (H, H, Plus, H, H, Plus),
    (H, V, Minus, H, V, Minus),
    (V, H, Minus, V, H, Minus),
    (V, V, Plus, V, V, Plus),
    (H, V, Minus, H, H, Plus),
    (V, V, Plus, V, H, Minus),
    (V, H, Minus, H, H, Plus),
    (V, V, Plus, H, H, Plus),
    (V, H, Minus, H, V, Minus),
    (V, V, Plus, H, V, Minus),
];

/// Two-photon joint expectation values.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhotonElements {
    /// Values in [`TWO_PHOTON_LABELS`] order.
    pub values: [C64; 10],
    pub tau: f64,
    /// Zeeman energy used in the `e^{ibτ}` factor.
    pub b: f64,
    pub normalization: f64,
    pub quadrature_check: f64,
}

impl TwoPhotonElements {
    /// Elements of an exact pure state `α|HHφ₊⟩ + β|HVφ₋⟩ + γ|VHφ₋⟩ + δ|VVφ₊⟩`
    /// written in a frame where the `V₁` components carry the phase
    /// `e^{ibτ}` relative to `H₁`, as the scattered light does.
    pub fn from_state(c: &IdealTwo, b: f64, tau: f64) -> Self {
        let ph = C64::from_polar(1.0, b * tau);
        let amp = |p: Polarization, q: Polarization, l: Spin| -> C64 {
            match (p, q, l) {
                (H, H, Plus) => c.alpha,
                (H, V, Minus) => c.beta,
                (V, H, Minus) => c.gamma * ph,
                (V, V, Plus) => c.delta * ph,
                _ => C64::new(0.0, 0.0),
            }
        };
        let mut values = [C64::new(0.0, 0.0); 10];
        for (v, &(p, q, l, p2, q2, l2)) in values.iter_mut().zip(TWO_PHOTON_LABELS.iter()) {
            // ρ_{(P'Q'λ'),(PQλ)} = c_{P'Q'λ'} c*_{PQλ}
            *v = amp(p2, q2, l2) * amp(p, q, l).conj();
        }
        TwoPhotonElements { values, tau, b, normalization: 1.0, quadrature_check: 0.0 }
    }

    /// Hermitian 4×4 matrix `M` in the basis `{HHφ₊, HVφ₋, VHφ₋, VVφ₊}`
    /// with the `e^{ibτ}` factor applied to the `V₁`-vs-`H₁` coherences, so
    /// that `F⁽²⁾ = c†Mc`.
    pub fn matrix(&self) -> Matrix4<C64> {
        let s = &self.values;
        let ph = C64::from_polar(1.0, self.b * self.tau);
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            m[(i, i)] = C64::new(s[i].re, 0.0);
        }
        let upper = [(0, 1, s[4]), (2, 3, s[5]), (0, 2, ph * s[6]), (0, 3, ph * s[7]), (1, 2, ph * s[8]), (1, 3, ph * s[9])];
        for (i, j, v) in upper {
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m
    }

    pub fn fidelity(&self, c: &IdealTwo) -> f64 {
        let v = c.as_vector();
        (v.adjoint() * self.matrix() * v)[(0, 0)].re
    }

    /// Target with the magnitudes of `base` and the phases of `β, γ, δ`
    /// chosen to maximise the fidelity.
    ///
    /// The three relative phases are exactly what local phase shifts on the
    /// spin and on each photon's `V` component can absorb, so the result is
    /// `base` expressed in the best-matching local frame. Coordinate ascent
    /// from several starting phases; the best local maximum wins.
    pub fn calibrated_target(&self, base: &IdealTwo) -> IdealTwo {
        let m = self.matrix();
        let mags = base.as_vector().map(|z| z.norm());
        let mut best = (self.fidelity(base), *base);
        for start in 0..8 {
            let mut c = base.as_vector();
            let rot = C64::from_polar(1.0, start as f64 * std::f64::consts::FRAC_PI_4);
            c[1] *= rot;
            c[2] *= rot.conj();
            for _ in 0..500 {
                let mut moved: f64 = 0.0;
                for k in 1..4 {
                    let field: C64 = (0..4).filter(|&j| j != k).map(|j| m[(k, j)] * c[j]).sum();
                    if field.norm() == 0.0 {
                        continue;
                    }
                    let next = C64::from_polar(mags[k], field.arg());
                    moved = moved.max((next - c[k]).norm());
                    c[k] = next;
                }
                if moved < 1e-14 {
                    break;
                }
            }
            let cand = IdealTwo::from_vector(&c);
            let f = self.fidelity(&cand);
            if f > best.0 {
                best = (f, cand);
            }
        }
        best.1
    }

    pub fn labels() -> Vec<String> {
        TWO_PHOTON_LABELS
            .iter()
            .map(|&(p, q, l, p2, q2, l2)| element_label(&pol_spin_label(&[p, q], l), &pol_spin_label(&[p2, q2], l2)))
            .collect()
    }
}

/// Computes the ten two-photon elements with a two-pulse train `{0, τ}`.
pub fn two_photon_elements(
    config: &SystemConfig,
    field: &FieldVector,
    tau: f64,
    opts: &FidelityOptions,
) -> Result<TwoPhotonElements> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be > 0 (got {tau})")));
    }
    let model = CavityModel::new(config, *field, PulseTrain::pair(config, tau))?;
    two_photon_elements_model(&model, tau, opts)
}

pub(crate) fn two_photon_elements_model(
    model: &CavityModel,
    tau: f64,
    opts: &FidelityOptions,
) -> Result<TwoPhotonElements> {
    let config = &model.config;
    let ops = &model.ops;
    let pulses = &model.pulses;
    let basis = reference_basis(config);
    let t0 = config.t0;

    let (t_start, _) = model.default_window();
    let t_lo = (pulses.first_center() - opts.outer_half_width * t0).max(t_start);
    let t_hi = pulses.first_center().max(pulses.last_center() - tau) + opts.outer_half_width * t0;
    let mut n = ((t_hi - t_lo) / t0 * opts.outer_points_per_t0).ceil() as usize;
    n += n % 2;
    let h = (t_hi - t_lo) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| t_lo + h * k as f64).collect();

    let xi = |p: Polarization| OutputFieldSpec::new(p, ops, config).affine(pulses);
    let (xi_h, xi_v) = (xi(H), xi(V));
    let field_of = |p: Polarization| match p {
        H => &xi_h,
        V => &xi_v,
    };
    let sigma = |l: Spin, l2: Spin| ops.ground_outer(&spin_ket(&basis, l), &spin_ket(&basis, l2));

    // Group labels by the first-photon pair (P, P').
    let groups: [(Polarization, Polarization); 3] = [(H, H), (V, V), (V, H)];
    let mut sandwiches: Vec<Vec<(usize, Sandwich)>> = groups.iter().map(|_| Vec::new()).collect();
    for (idx, &(p, q, l, p2, q2, l2)) in TWO_PHOTON_LABELS.iter().enumerate() {
        let g = groups.iter().position(|&gp| gp == (p, p2)).expect("label group");
        sandwiches[g].push((idx, Sandwich { left: field_of(q), sigma: sigma(l, l2), right: field_of(q2) }));
    }
    let requests: Vec<CorrelatorRequest> = groups
        .iter()
        .zip(&sandwiches)
        .map(|(&(p, p2), s)| CorrelatorRequest {
            left: field_of(p) as &dyn TimeDependentOperator,
            right: field_of(p2) as &dyn TimeDependentOperator,
            middles: s.iter().map(|(_, m)| m as &dyn TimeDependentOperator).collect(),
        })
        .collect();

    let states = sample_states(model, opts.tolerances, &initial_state(model), t_start, &grid)?;
    let raw = correlate_with_states(model, opts.tolerances, &grid, &states, tau, &requests)?;

    let norm = normalization_two_train(pulses, config.kappa, tau);
    let mut values = [C64::new(0.0, 0.0); 10];
    let mut check: f64 = 0.0;
    for (g, group) in sandwiches.iter().enumerate() {
        for (m, (idx, _)) in group.iter().enumerate() {
            let (v, diff) = trapezoid_with_check(h, &raw[g][m]);
            values[*idx] = v / norm;
            check = check.max(diff.norm() / norm);
        }
    }
    Ok(TwoPhotonElements { values, tau, b: model.field.magnitude_b, normalization: norm, quadrature_check: check })
}

pub fn fidelity_two_photon_with(
    coeffs: &IdealTwo,
    tau: f64,
    config: &SystemConfig,
    field: &FieldVector,
    opts: &FidelityOptions,
) -> Result<FidelityResult> {
    check_normalized(
        coeffs.alpha.norm_sqr() + coeffs.beta.norm_sqr() + coeffs.gamma.norm_sqr() + coeffs.delta.norm_sqr(),
    )?;
    let e = two_photon_elements(config, field, tau, opts)?;
    Ok(FidelityResult {
        value: e.fidelity(coeffs),
        elements: TwoPhotonElements::labels()
            .into_iter()
            .zip(e.values.iter())
            .map(|(l, v)| (l, v.re, v.im))
            .collect(),
        normalization: e.normalization,
        quadrature_check: e.quadrature_check,
        config: config.clone(),
        field: *field,
    })
}

/// `F⁽²⁾` with default numerical options.
pub fn fidelity_two_photon(
    coeffs: &IdealTwo,
    tau: f64,
    config: &SystemConfig,
    field: &FieldVector,
) -> Result<FidelityResult> {
    fidelity_two_photon_with(coeffs, tau, config, field, &FidelityOptions::default())
}
