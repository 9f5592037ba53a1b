use nalgebra::SymmetricEigen;

use super::liouvillian::Liouvillian;
use super::ode::{Dopri5, Stats, Tolerances};
use crate::error::{Error, Result};
use crate::model::{CavityModel, FieldVector, PulseTrain, SystemConfig};
use crate::{CMatrix, CVector, C64};

/// A density matrix on the composite space together with its time stamp.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    pub time: f64,
    pub matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(time: f64, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(DensityOperator { time, matrix })
    }

    pub fn pure(time: f64, ket: &CVector) -> Self {
        let norm = ket.norm();
        let k = ket / C64::new(norm, 0.0);
        DensityOperator { time, matrix: &k * k.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr[ρ O]`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        trace_product(&self.matrix, op)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Replaces `X` by `(X + X†)/2`.
pub fn symmetrize(x: &mut CMatrix) {
    let n = x.nrows();
    for j in 0..n {
        for i in 0..=j {
            let v = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
            x[(i, j)] = v;
            x[(j, i)] = v.conj();
        }
    }
}

/// Initial state, window and output grid of one evolution.
#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    pub initial: CMatrix,
    pub t_start: f64,
    pub t_end: f64,
    pub tolerances: Tolerances,
    /// Sample times, ascending, inside `[t_start, t_end]`.
    pub grid: Vec<f64>,
}

impl EvolutionSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.t_start < self.t_end) {
            return Err(Error::InvalidArgument(format!(
                "empty time window [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.initial.nrows() != dim || self.initial.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.initial.nrows() });
        }
        if self.grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("output grid must be ascending".into()));
        }
        if let (Some(&first), Some(&last)) = (self.grid.first(), self.grid.last()) {
            if first < self.t_start || last > self.t_end {
                return Err(Error::InvalidArgument("output grid leaves the time window".into()));
            }
        }
        Ok(())
    }
}

/// `n + 1` equally spaced points covering `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..=n).map(|i| if i == n { b } else { a + h * i as f64 }).collect()
}

/// Master-equation propagator with reusable integrator buffers.
#[derive(Clone, Debug)]
pub struct Propagator {
    liouvillian: Liouvillian,
    solver: Dopri5,
}

impl Propagator {
    pub fn new(model: &CavityModel, tol: Tolerances) -> Self {
        let liouvillian = Liouvillian::new(model);
        let n = liouvillian.dim();
        Propagator { liouvillian, solver: Dopri5::new(n * n, tol) }
    }

    pub fn dim(&self) -> usize {
        self.liouvillian.dim()
    }

    pub fn stats(&self) -> Stats {
        self.solver.stats
    }

    /// Propagates `x` (any operator, not necessarily a state) from `t_from`
    /// to `t_to` with the same generator. The step control starts afresh, so
    /// the result does not depend on earlier calls.
    pub fn propagate(&mut self, x: &mut CMatrix, t_from: f64, t_to: f64, hermitian: bool) -> Result<()> {
        self.liouvillian.set_hermitian(hermitian);
        self.solver.integrate(&mut self.liouvillian, t_from, x.as_mut_slice(), t_to, None)?;
        if hermitian {
            symmetrize(x);
        }
        Ok(())
    }

    /// Evolves a Hermitian `x` from `t_start` through every grid point, calling
    /// `observe(index, t, x)` at each. The state is re-symmetrised at samples.
    pub fn run<F>(&mut self, x: &mut CMatrix, t_start: f64, grid: &[f64], mut observe: F) -> Result<()>
    where
        F: FnMut(usize, f64, &CMatrix) -> Result<()>,
    {
        self.liouvillian.set_hermitian(true);
        let mut t = t_start;
        let mut h = None;
        for (k, &tk) in grid.iter().enumerate() {
            if tk > t {
                h = Some(self.solver.integrate(&mut self.liouvillian, t, x.as_mut_slice(), tk, h)?);
                symmetrize(x);
                t = tk;
            }
            observe(k, tk, x)?;
        }
        Ok(())
    }
}

/// Evolves `spec.initial` and returns ρ at every grid point.
pub fn evolve_model(model: &CavityModel, spec: &EvolutionSpec) -> Result<Vec<DensityOperator>> {
    spec.validate(model.dim())?;
    let mut prop = Propagator::new(model, spec.tolerances);
    let mut x = spec.initial.clone();
    let mut out = Vec::with_capacity(spec.grid.len());
    prop.run(&mut x, spec.t_start, &spec.grid, |_, t, rho| {
        out.push(DensityOperator { time: t, matrix: rho.clone() });
        Ok(())
    })?;
    Ok(out)
}

/// [`evolve_model`] for a single pulse centred at zero.
pub fn evolve(spec: &EvolutionSpec, config: &SystemConfig, field: &FieldVector) -> Result<Vec<DensityOperator>> {
    let model = CavityModel::new(config, *field, PulseTrain::single(config))?;
    evolve_model(&model, spec)
}
