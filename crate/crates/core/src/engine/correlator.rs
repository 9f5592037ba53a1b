//! Two-time correlators by the quantum regression theorem.
//!
//! For each outer time `t`, the conditioned operator `R ρ(t) L†` is
//! propagated with the same generator to `t + τ` and traced against the
//! middle operator there:
//!
//! ```text
//! ⟨L†(t) M(t+τ) R(t)⟩ = Tr[ M(t+τ) · Φ(t+τ, t)(R ρ(t) L†) ]
//! ```

use rayon::prelude::*;

use super::evolve::{symmetrize, trace_product, Propagator};
use super::ode::Tolerances;
use crate::error::{Error, Result};
use crate::model::{CavityModel, PulseTrain};
use crate::{CMatrix, C64};

/// An operator whose matrix depends on time.
pub trait TimeDependentOperator: Sync {
    fn at(&self, t: f64) -> CMatrix;
}

impl TimeDependentOperator for CMatrix {
    fn at(&self, _t: f64) -> CMatrix {
        self.clone()
    }
}

/// `c · η(t) · 1 + O`: an output-field-like operator whose c-number part
/// follows the drive envelope.
#[derive(Clone, Debug)]
pub struct AffineOp {
    pub drive_coeff: C64,
    pub pulses: PulseTrain,
    pub op: CMatrix,
}

impl AffineOp {
    pub fn scalar(&self, t: f64) -> C64 {
        self.drive_coeff * self.pulses.amplitude(t)
    }
}

impl TimeDependentOperator for AffineOp {
    fn at(&self, t: f64) -> CMatrix {
        let mut m = self.op.clone();
        let s = self.scalar(t);
        for i in 0..m.nrows() {
            m[(i, i)] += s;
        }
        m
    }
}

/// Product of operators evaluated at the same time, leftmost first.
pub struct Product<'a>(pub Vec<&'a dyn TimeDependentOperator>);

impl TimeDependentOperator for Product<'_> {
    fn at(&self, t: f64) -> CMatrix {
        let mut it = self.0.iter();
        let first = it.next().expect("empty operator product").at(t);
        it.fold(first, |acc, op| acc * op.at(t))
    }
}

/// One conditioned propagation `R ρ(t) L†` and the middle operators traced
/// against it at `t + τ`.
pub struct CorrelatorRequest<'a> {
    pub left: &'a dyn TimeDependentOperator,
    pub right: &'a dyn TimeDependentOperator,
    pub middles: Vec<&'a dyn TimeDependentOperator>,
}

fn is_hermitian(x: &CMatrix) -> bool {
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = (x - x.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    err <= 1e-13 * scale.max(1e-300)
}

/// Evaluates every request on `t_grid` (ascending). `rho_at[k]` must be
/// `ρ(t_grid[k])`. Returns `values[request][middle][k]`.
///
/// Outer times are independent and run in parallel; each propagation starts
/// its own step control so results are identical for any thread count.
pub fn correlate_with_states(
    model: &CavityModel,
    tol: Tolerances,
    t_grid: &[f64],
    rho_at: &[CMatrix],
    tau: f64,
    requests: &[CorrelatorRequest<'_>],
) -> Result<Vec<Vec<Vec<C64>>>> {
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau must be >= 0 (got {tau})")));
    }
    if rho_at.len() != t_grid.len() {
        return Err(Error::DimensionMismatch { expected: t_grid.len(), found: rho_at.len() });
    }
    let per_t: Vec<Vec<Vec<C64>>> = t_grid
        .par_iter()
        .zip(rho_at.par_iter())
        .map_init(
            || Propagator::new(model, tol),
            |prop, (&t, rho)| -> Result<Vec<Vec<C64>>> {
                let mut row = Vec::with_capacity(requests.len());
                for req in requests {
                    let r = req.right.at(t);
                    let l = req.left.at(t);
                    let mut x = &r * rho * l.adjoint();
                    if tau > 0.0 {
                        let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
                        if scale > 0.0 {
                            x.unscale_mut(scale);
                            let herm = is_hermitian(&x);
                            if herm {
                                symmetrize(&mut x);
                            }
                            prop.propagate(&mut x, t, t + tau, herm)?;
                            x.scale_mut(scale);
                        }
                    }
                    row.push(req.middles.iter().map(|m| trace_product(&m.at(t + tau), &x)).collect());
                }
                Ok(row)
            },
        )
        .collect::<Result<_>>()?;

    let mut out: Vec<Vec<Vec<C64>>> = requests
        .iter()
        .map(|r| vec![Vec::with_capacity(t_grid.len()); r.middles.len()])
        .collect();
    for row in per_t {
        for (q, vals) in row.into_iter().enumerate() {
            for (m, v) in vals.into_iter().enumerate() {
                out[q][m].push(v);
            }
        }
    }
    Ok(out)
}

/// Samples ρ on `t_grid` starting from `initial` at `t_start`.
pub fn sample_states(
    model: &CavityModel,
    tol: Tolerances,
    initial: &CMatrix,
    t_start: f64,
    t_grid: &[f64],
) -> Result<Vec<CMatrix>> {
    if t_grid.first().is_some_and(|&t| t < t_start) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("outer grid must be ascending and after t_start".into()));
    }
    let mut prop = Propagator::new(model, tol);
    let mut x = initial.clone();
    let mut states = Vec::with_capacity(t_grid.len());
    prop.run(&mut x, t_start, t_grid, |_, _, rho| {
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(states)
}

/// `⟨L†(t) M(t+τ) R(t)⟩` on `t_grid`, where `L` and `R` are the products of
/// `left_ops` and `right_ops`.
#[allow(clippy::too_many_arguments)]
pub fn two_time_correlator(
    model: &CavityModel,
    tol: Tolerances,
    initial: &CMatrix,
    t_start: f64,
    t_grid: &[f64],
    tau: f64,
    left_ops: &[&dyn TimeDependentOperator],
    middle_op: &dyn TimeDependentOperator,
    right_ops: &[&dyn TimeDependentOperator],
) -> Result<Vec<C64>> {
    if left_ops.is_empty() || right_ops.is_empty() {
        return Err(Error::InvalidArgument("operator lists must be nonempty".into()));
    }
    let states = sample_states(model, tol, initial, t_start, t_grid)?;
    let left = Product(left_ops.to_vec());
    let right = Product(right_ops.to_vec());
    let req = CorrelatorRequest { left: &left, right: &right, middles: vec![middle_op] };
    let mut out = correlate_with_states(model, tol, t_grid, &states, tau, &[req])?;
    Ok(out.remove(0).remove(0))
}
