use serde::{Deserialize, Serialize};

use super::{fidelity_one_photon_with, FidelityOptions, IdealOne};
use crate::error::{Error, Result};
use crate::SystemConfig;

/// Best external field for `F⁽¹⁾` without nuclear noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldOptimum {
    pub b_ext: f64,
    pub fidelity: f64,
    pub evaluations: usize,
}

/// Golden-section search for the `b_ext` maximising `F⁽¹⁾` on
/// `[lo, hi]` (ns⁻¹), stopping when the bracket is narrower than `b_tol`.
///
/// `F⁽¹⁾(b)` is unimodal around `Γ_cav` for the cavity presets; a bracket
/// of `[0.3, 3]·Γ_cav` is a safe default.
pub fn optimal_field(
    config: &SystemConfig,
    coeffs: &IdealOne,
    opts: &FidelityOptions,
    (lo, hi): (f64, f64),
    b_tol: f64,
) -> Result<FieldOptimum> {
    if !(lo >= 0.0 && hi > lo && b_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("bad search bracket [{lo}, {hi}] / tol {b_tol}")));
    }
    let mut evaluations = 0;
    let mut f = |b: f64| -> Result<f64> {
        evaluations += 1;
        let mut c = config.clone();
        c.b_ext = b;
        Ok(fidelity_one_photon_with(coeffs, &c, &c.external_field(), opts)?.value)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > b_tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let (b_best, f_best) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(FieldOptimum { b_ext: b_best, fidelity: f_best, evaluations })
}
