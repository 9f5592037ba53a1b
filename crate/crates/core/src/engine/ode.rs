//! Dormand–Prince 5(4) with PI step-size control on complex state vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// A first-order system `y' = f(t, y)` on `C^n`.
pub trait OdeSystem {
    fn len(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

/// Error-control settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Optional cap on the step length (ns).
    pub h_max: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10, max_steps: 10_000_000, h_max: None }
    }
}

impl Tolerances {
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances { rtol: self.rtol * factor, atol: self.atol * factor, ..*self }
    }
}

/// Step counters accumulated over the lifetime of a solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub rhs_evals: usize,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller (Hairer & Wanner, DOPRI5 defaults).
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Reusable work buffers for one system size.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub stats: Stats,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    err_prev: f64,
}

impl Dopri5 {
    pub fn new(len: usize, tol: Tolerances) -> Self {
        let z = vec![C64::new(0.0, 0.0); len];
        Dopri5 {
            tol,
            stats: Stats::default(),
            k: [z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
            y_stage: z.clone(),
            y_new: z,
            err_prev: 1e-4,
        }
    }

    fn scaled_norm(&self, v: &[C64], y: &[C64]) -> f64 {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(vi, yi)| {
                let sk = self.tol.atol + self.tol.rtol * yi.norm_sqr().sqrt();
                vi.norm_sqr() / (sk * sk)
            })
            .sum();
        (s / v.len().max(1) as f64).sqrt()
    }

    /// Starting step from the local Lipschitz estimate.
    fn initial_step<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &[C64], span: f64) -> f64 {
        let d0 = self.scaled_norm(y, y);
        let d1 = self.scaled_norm(&self.k[0], y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        for i in 0..y.len() {
            self.y_stage[i] = y[i] + self.k[0][i] * h0;
        }
        sys.rhs(t + h0, &self.y_stage, &mut self.k[1]);
        self.stats.rhs_evals += 1;
        let diff: Vec<C64> = self.k[1].iter().zip(&self.k[0]).map(|(a, b)| a - b).collect();
        let d2 = self.scaled_norm(&diff, y) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
        (100.0 * h0).min(h1)
    }

    /// Integrates `y` in place from `t` to `t_end` (either direction is not
    /// supported: `t_end ≥ t`). `h` carries the step-size suggestion in and out;
    /// pass `None` to let the solver choose a starting step.
    pub fn integrate<S: OdeSystem>(
        &mut self,
        sys: &mut S,
        t: f64,
        y: &mut [C64],
        t_end: f64,
        h: Option<f64>,
    ) -> Result<f64> {
        let n = y.len();
        debug_assert_eq!(n, sys.len());
        if t_end < t {
            return Err(Error::InvalidArgument(format!("cannot integrate backwards from {t} to {t_end}")));
        }
        if t_end == t {
            return Ok(h.unwrap_or(0.0));
        }
        let mut t = t;
        sys.rhs(t, y, &mut self.k[0]);
        self.stats.rhs_evals += 1;
        let mut h = match h {
            Some(h) if h > 0.0 => h,
            _ => self.initial_step(sys, t, y, t_end - t),
        };
        if let Some(hm) = self.tol.h_max {
            h = h.min(hm);
        }
        let mut steps = 0usize;
        let mut last_rejected = false;
        let mut h_next = h;

        loop {
            let remaining = t_end - t;
            if remaining <= 1e-13 * t_end.abs().max(1.0) {
                return Ok(h_next);
            }
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            let h_min = 1e-14 * t.abs().max(1.0);
            if h < h_min && !last {
                return Err(Error::StepUnderflow { t, h });
            }
            steps += 1;
            if steps > self.tol.max_steps {
                return Err(Error::TooManySteps { max_steps: self.tol.max_steps, t_end });
            }

            self.stages(sys, t, y, h);
            let err = self.error_norm(y, h);
            if !err.is_finite() {
                return Err(Error::NonFinite { t });
            }

            if err <= 1.0 {
                self.stats.accepted += 1;
                let mut fac = err.max(1e-10).powf(-ALPHA) * self.err_prev.powf(BETA) * SAFETY;
                fac = fac.clamp(FAC_MIN, FAC_MAX);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                self.err_prev = err.max(1e-4);
                t = if last { t_end } else { t + h };
                y.copy_from_slice(&self.y_new);
                // FSAL: k7 is f(t + h, y_new).
                self.k.swap(0, 6);
                h_next = if last { h_next.max(h * fac) } else { h * fac };
                if let Some(hm) = self.tol.h_max {
                    h_next = h_next.min(hm);
                }
                h = h_next;
                last_rejected = false;
                if last {
                    return Ok(h_next);
                }
            } else {
                self.stats.rejected += 1;
                let fac = (err.powf(-ALPHA) * SAFETY).max(FAC_MIN);
                h *= fac;
                last_rejected = true;
            }
        }
    }

    fn stages<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &[C64], h: f64) {
        fn combine(dst: &mut [C64], y: &[C64], k: &[Vec<C64>; 7], terms: &[(usize, f64)], h: f64) {
            dst.copy_from_slice(y);
            for &(ki, a) in terms {
                let s = a * h;
                for (d, kv) in dst.iter_mut().zip(&k[ki]) {
                    *d += kv * s;
                }
            }
        }
        let stages: [(usize, f64, &[(usize, f64)]); 5] = [
            (1, C2, &[(0, A21)]),
            (2, C3, &[(0, A31), (1, A32)]),
            (3, C4, &[(0, A41), (1, A42), (2, A43)]),
            (4, C5, &[(0, A51), (1, A52), (2, A53), (3, A54)]),
            (5, 1.0, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]),
        ];
        for (dst, c, terms) in stages {
            combine(&mut self.y_stage, y, &self.k, terms, h);
            sys.rhs(t + c * h, &self.y_stage, &mut self.k[dst]);
        }
        combine(&mut self.y_new, y, &self.k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], h);
        sys.rhs(t + h, &self.y_new, &mut self.k[6]);
        self.stats.rhs_evals += 6;
    }

    fn error_norm(&self, y: &[C64], h: f64) -> f64 {
        let k = &self.k;
        let mut s = 0.0;
        let it = y.iter().zip(&self.y_new).zip(k[0].iter().zip(&k[2])).zip(k[3].iter().zip(&k[4])).zip(k[5].iter().zip(&k[6]));
        for ((((yi, yn), (k0, k2)), (k3, k4)), (k5, k6)) in it {
            let e = (k0 * E1 + k2 * E3 + k3 * E4 + k4 * E5 + k5 * E6 + k6 * E7) * h;
            // norm_sqr + sqrt: `norm()` goes through hypot, which dominates here.
            let sk = self.tol.atol + self.tol.rtol * yi.norm_sqr().max(yn.norm_sqr()).sqrt();
            s += e.norm_sqr() / (sk * sk);
        }
        (s / y.len().max(1) as f64).sqrt()
    }
}
