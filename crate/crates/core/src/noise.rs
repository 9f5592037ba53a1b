//! Quasi-static Overhauser fields and seeded Monte Carlo ensembles.
//!
//! Each Cartesian component of the nuclear field is Gaussian with zero mean
//! and standard deviation `Δ_B` (energy units, ns⁻¹), frozen for the duration
//! of one experimental run. Sample `i` of an ensemble draws from ChaCha8
//! stream `i` of the master seed, so results do not depend on how the samples
//! are scheduled.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{FieldVector, SystemConfig};

/// Reference maximal spread `g_e μ_B Δ_B^max` (ns⁻¹) for unpolarised nuclei.
pub const DELTA_B_MAX: f64 = 0.2;

/// Which Overhauser components are sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseMode {
    /// Only the component along the external field; valid when
    /// `b_ext ≫ Δ_B`.
    #[default]
    #[serde(rename = "x")]
    XOnly,
    /// All three components.
    #[serde(rename = "3d")]
    Full3d,
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "x-only" => Ok(NoiseMode::XOnly),
            "3d" | "full-3d" => Ok(NoiseMode::Full3d),
            _ => Err(Error::Parse(format!("unknown noise mode '{s}' (expected x or 3d)"))),
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::XOnly => "x",
            NoiseMode::Full3d => "3d",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverhauserSpec {
    /// Standard deviation of each sampled component (ns⁻¹).
    pub delta_b: f64,
    pub mode: NoiseMode,
    pub delta_b_max: f64,
}

impl OverhauserSpec {
    pub fn new(delta_b: f64, mode: NoiseMode) -> Result<Self> {
        let s = OverhauserSpec { delta_b, mode, delta_b_max: DELTA_B_MAX };
        s.validate()?;
        Ok(s)
    }

    /// No nuclear field.
    pub fn none() -> Self {
        OverhauserSpec { delta_b: 0.0, mode: NoiseMode::XOnly, delta_b_max: DELTA_B_MAX }
    }

    /// Spread for nuclear polarisation `p` under [`polarization_to_spread`].
    pub fn from_polarization(p: f64, mode: NoiseMode) -> Result<Self> {
        Self::new(polarization_to_spread(p, DELTA_B_MAX)?, mode)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_b_max.is_finite() && self.delta_b_max >= 0.0) {
            return Err(Error::InvalidConfig(format!("delta_b_max must be >= 0 (got {})", self.delta_b_max)));
        }
        if !(self.delta_b >= 0.0 && self.delta_b <= self.delta_b_max) {
            return Err(Error::InvalidConfig(format!(
                "delta_b must lie in [0, {}] (got {})",
                self.delta_b_max, self.delta_b
            )));
        }
        Ok(())
    }
}

impl Default for OverhauserSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// One frozen Overhauser field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OverhauserSample {
    /// Shift of the Zeeman energy along the external-field direction.
    Shift(f64),
    /// Cartesian field increment `(x, y, z)`.
    Vector([f64; 3]),
}

impl OverhauserSample {
    /// External field plus this sample.
    pub fn total_field(&self, config: &SystemConfig) -> FieldVector {
        match *self {
            OverhauserSample::Shift(d) => FieldVector::new(config.b_ext + d, config.theta, config.phi),
            OverhauserSample::Vector(v) => {
                if v == [0.0; 3] {
                    return config.external_field();
                }
                let e = config.external_field().to_cartesian();
                FieldVector::from_cartesian([e[0] + v[0], e[1] + v[1], e[2] + v[2]])
            }
        }
    }
}

/// Generator for sample `index` of the ensemble seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_overhauser<R: rand::Rng + ?Sized>(spec: &OverhauserSpec, rng: &mut R) -> OverhauserSample {
    let mut draw = || -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        spec.delta_b * z
    };
    match spec.mode {
        NoiseMode::XOnly => OverhauserSample::Shift(draw()),
        NoiseMode::Full3d => OverhauserSample::Vector([draw(), draw(), draw()]),
    }
}

/// `T₂* = √2 / Δ_B`.
pub fn t2_star(delta_b: f64) -> Result<f64> {
    if !(delta_b > 0.0 && delta_b.is_finite()) {
        return Err(Error::InvalidArgument(format!("T2* needs delta_b > 0 (got {delta_b})")));
    }
    Ok(std::f64::consts::SQRT_2 / delta_b)
}

/// `exp[−(t/T₂*)²]`; identically one without noise.
pub fn coherence_decay(t: f64, delta_b: f64) -> f64 {
    let x = delta_b * t;
    (-x * x / 2.0).exp()
}

/// `|⟨e^{−i b_N t}⟩|` over `n` Gaussian shifts of width `delta_b`.
pub fn coherence_decay_mc(t: f64, delta_b: f64, n: usize, seed: u64) -> f64 {
    coherence_decay_mc_many(&[t], delta_b, n, seed)[0]
}

/// [`coherence_decay_mc`] at several times from one set of draws.
pub fn coherence_decay_mc_many(ts: &[f64], delta_b: f64, n: usize, seed: u64) -> Vec<f64> {
    if n == 0 {
        return vec![f64::NAN; ts.len()];
    }
    let mut rng = sample_rng(seed, 0);
    let shifts: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            delta_b * z
        })
        .collect();
    ts.iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0, 0.0);
            for &b in &shifts {
                let (s, c) = (b * t).sin_cos();
                re += c;
                im -= s;
            }
            (re * re + im * im).sqrt() / n as f64
        })
        .collect()
}

/// Least-squares `T` of `c(t) = exp[−(t/T)²]`, fitted as `−ln c = t²/T²`
/// through the origin. Points with `c ≤ 0` or `t = 0` are skipped.
pub fn fit_gaussian_decay(ts: &[f64], cs: &[f64]) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &c) in ts.iter().zip(cs) {
        if c > 0.0 && t != 0.0 {
            let t2 = t * t;
            num += t2 * t2;
            den += t2 * (-c.ln());
        }
    }
    if !(den > 0.0) {
        return Err(Error::InvalidArgument("no decaying points to fit".into()));
    }
    Ok((num / den).sqrt())
}

/// Linear map from nuclear polarisation `p ∈ [0, 1]` to `Δ_B`.
pub fn polarization_to_spread(p: f64, delta_b_max: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("polarisation must lie in [0, 1] (got {p})")));
    }
    Ok(delta_b_max * (1.0 - p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub mean: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    /// Successful samples entering the statistics.
    pub n: usize,
    pub seed: u64,
    /// Samples whose simulation failed, excluded above.
    pub failures: usize,
    /// Successful values in sample order.
    pub values: Vec<f64>,
}

impl EnsembleResult {
    pub fn from_values(values: Vec<f64>, seed: u64, failures: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no successful samples".into()));
        }
        let n = values.len();
        // Running mean: exact for constant data.
        let mut mean = 0.0;
        for (k, v) in values.iter().enumerate() {
            mean += (v - mean) / (k + 1) as f64;
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(EnsembleResult {
            mean,
            q25: nearest_rank(&sorted, 0.25),
            median: nearest_rank(&sorted, 0.5),
            q75: nearest_rank(&sorted, 0.75),
            n,
            seed,
            failures,
            values,
        })
    }

    /// Sample standard deviation (zero for a single sample).
    pub fn std_dev(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let v = self.values.iter().map(|x| (x - self.mean).powi(2)).sum::<f64>() / (self.n - 1) as f64;
        v.sqrt()
    }

    pub fn std_error(&self) -> f64 {
        self.std_dev() / (self.n as f64).sqrt()
    }
}

/// Nearest-rank quantile of sorted data: element `⌈qN⌉` (1-based).
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// One-sided lower confidence bound on `mean(a) − mean(b)` for independent
/// samples (Welch standard error, normal quantile `z`).
pub fn mean_difference_lower_bound(a: &EnsembleResult, b: &EnsembleResult, z: f64) -> f64 {
    let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    a.mean - b.mean - z * se
}

/// Runs `experiment` on `n_samples` frozen-noise fields drawn from `spec`.
///
/// The experiment maps a total field to a fidelity. Failed samples are logged,
/// counted and excluded. Output is bitwise identical for a given
/// `(seed, n_samples)` whatever the thread count.
pub fn ensemble_fidelity<F>(
    config: &SystemConfig,
    spec: &OverhauserSpec,
    n_samples: usize,
    seed: u64,
    experiment: F,
) -> Result<EnsembleResult>
where
    F: Fn(&FieldVector) -> Result<f64> + Sync,
{
    spec.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    if spec.mode == NoiseMode::XOnly && config.b_ext < 5.0 * spec.delta_b {
        log::warn!(
            "b_ext = {} is not well above 5 delta_b = {}; the x-only noise model is questionable",
            config.b_ext,
            5.0 * spec.delta_b
        );
    }
    let outcomes: Vec<Result<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let field = if spec.delta_b == 0.0 {
                config.external_field()
            } else {
                sample_overhauser(spec, &mut sample_rng(seed, i)).total_field(config)
            };
            experiment(&field)
        })
        .collect();
    let mut values = Vec::with_capacity(n_samples);
    let mut failures = 0;
    for (i, r) in outcomes.into_iter().enumerate() {
        match r {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                failures += 1;
                log::warn!("sample {i} returned non-finite fidelity {v}");
            }
            Err(e) => {
                failures += 1;
                log::warn!("sample {i} failed: {e}");
            }
        }
    }
    if failures > 0 {
        log::warn!("{failures} of {n_samples} ensemble samples failed and were excluded");
    }
    EnsembleResult::from_values(values, seed, failures)
}
