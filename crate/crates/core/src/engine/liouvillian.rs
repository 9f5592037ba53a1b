use super::ode::OdeSystem;
use super::sparse::{Csr, Gather};
use crate::error::{Error, Result};
use crate::model::{CavityModel, FieldVector, PulseTrain, SystemConfig};
use crate::{CMatrix, C64};

/// `L(t)X = −i(H_eff X − X H_eff†) + κ Σ_λ a_λ X a_λ†` with
/// `H_eff(t) = H_static − (iκ/2) Σ_λ a_λ†a_λ + η(t) D`.
///
/// Operates on column-major `n × n` matrices flattened to slices. When the
/// operand is known to be Hermitian, `X H_eff† = (H_eff X)†` saves one sparse
/// product. Both products are routed through the column-axpy kernel for
/// `X A†`, which is markedly faster than row gathers on column-major data.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    n: usize,
    kappa: f64,
    pattern: Csr,
    static_vals: Vec<C64>,
    drive_vals: Vec<C64>,
    jumps: Vec<Gather>,
    pulses: PulseTrain,
    hermitian: bool,
    scratch: Vec<C64>,
    adjoint: Vec<C64>,
}

impl Liouvillian {
    pub fn new(model: &CavityModel) -> Self {
        let ops = &model.ops;
        let kappa = model.config.kappa;
        let h_eff = &model.h_static - ops.photon_number() * C64::new(0.0, kappa / 2.0);
        let (pattern, drive_vals) = Csr::union(&h_eff, &model.drive);
        let static_vals = pattern.vals.clone();
        let jumps = [&ops.a_plus, &ops.a_minus]
            .iter()
            .map(|a| Gather::from_dense(a).expect("annihilation operators have one entry per row"))
            .collect();
        let n = ops.dim;
        Liouvillian {
            n,
            kappa,
            pattern,
            static_vals,
            drive_vals,
            jumps,
            pulses: model.pulses.clone(),
            hermitian: true,
            scratch: vec![C64::new(0.0, 0.0); n * n],
            adjoint: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Declares whether subsequent operands are Hermitian.
    pub fn set_hermitian(&mut self, hermitian: bool) {
        self.hermitian = hermitian;
    }

    fn update_values(&mut self, t: f64) {
        let eta = self.pulses.amplitude(t);
        for ((v, s), d) in self.pattern.vals.iter_mut().zip(&self.static_vals).zip(&self.drive_vals) {
            *v = s + d * eta;
        }
    }

    pub fn apply_slice(&mut self, t: f64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        self.update_values(t);
        let i = C64::new(0.0, 1.0);
        out.fill(C64::new(0.0, 0.0));
        self.scratch.fill(C64::new(0.0, 0.0));
        if self.hermitian {
            // U = i X H_eff† is the adjoint of −i H_eff X.
            self.pattern.mul_right_adjoint_acc(i, x, &mut self.scratch);
            for j in 0..n {
                for r in 0..n {
                    out[r + n * j] = self.scratch[r + n * j] + self.scratch[j + n * r].conj();
                }
            }
        } else {
            // −i H_eff X = (i X† H_eff†)†, so both products use column axpys.
            let xt = &mut self.adjoint;
            for j in 0..n {
                for r in 0..n {
                    xt[r + n * j] = x[j + n * r].conj();
                }
            }
            self.pattern.mul_right_adjoint_acc(i, xt, &mut self.scratch);
            self.pattern.mul_right_adjoint_acc(i, x, out);
            for j in 0..n {
                for r in 0..n {
                    out[r + n * j] += self.scratch[j + n * r].conj();
                }
            }
        }
        for jump in &self.jumps {
            jump.sandwich_acc(self.kappa, x, out);
        }
    }

    pub fn apply(&mut self, t: f64, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        self.apply_slice(t, x.as_slice(), out.as_mut_slice());
        out
    }
}

impl OdeSystem for Liouvillian {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.apply_slice(t, y, dy);
    }
}

/// `L(t)ρ` for a single-pulse drive.
pub fn liouvillian_apply(rho: &CMatrix, t: f64, config: &SystemConfig, field: &FieldVector) -> Result<CMatrix> {
    let model = CavityModel::new(config, *field, PulseTrain::single(config))?;
    if rho.nrows() != model.dim() || rho.ncols() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: rho.nrows() });
    }
    let mut l = Liouvillian::new(&model);
    l.set_hermitian(false);
    Ok(l.apply(t, rho))
}
