use std::fmt;

use qdent_core::noise::NoiseMode;
use serde::Serialize;

use crate::spec::{Experiment, ExperimentSpec, Param, Point};

/// Truncation probability above which the Fock cutoff is flagged.
const TRUNCATION_WARN: f64 = 1e-6;

/// Nominal single-threaded cost of one F⁽¹⁾ evaluation for the high-Q preset
/// at cutoff 2 (s); other settings are scaled from it.
const F1_NOMINAL_SECONDS: f64 = 0.4;
/// Reference `window × fastest rate` of that evaluation.
const F1_NOMINAL_WORK: f64 = 2250.0;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub estimated_seconds: f64,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        if self.is_clean() {
            writeln!(f, "ok: no issues found")?;
        }
        Ok(())
    }
}

/// Probability of exceeding the cutoff for a coherent cavity field with mean
/// occupation `(2η₀/κ)²` per mode: the leading Poisson term `n̄^{N+1}/(N+1)!`.
pub fn truncation_estimate(p: &Point) -> f64 {
    let nbar = (2.0 * p.config.eta0 / p.config.kappa).powi(2);
    let k = p.config.fock_cutoff as i32 + 1;
    let fact: f64 = (1..=k).map(f64::from).product();
    nbar.powi(k) / fact
}

fn f1_seconds(p: &Point) -> f64 {
    let c = &p.config;
    let window = 10.0 * c.t0 + 10.0 / c.gamma_cav().max(1e-2 * c.kappa);
    let rate = c.kappa.max(c.g).max(c.b_ext);
    let dim_scale = (c.dim() as f64 / 36.0).powi(2);
    F1_NOMINAL_SECONDS * window * rate / F1_NOMINAL_WORK * dim_scale
}

fn uses_noise(e: Experiment) -> bool {
    matches!(e, Experiment::FieldSweep | Experiment::EnsembleF1 | Experiment::EnsembleF2 | Experiment::ProtocolA)
}

/// Dry-run checks; nothing is simulated.
pub fn validate(spec: &ExperimentSpec) -> Report {
    let mut r = Report::default();
    let points: Vec<Point> =
        spec.sweep.values.iter().filter_map(|&v| spec.base.with(spec.sweep.parameter, v).ok()).collect();

    if uses_noise(spec.experiment) {
        for p in &points {
            if p.noise.mode == NoiseMode::XOnly && (p.config.b_ext == 0.0 || p.config.b_ext < 5.0 * p.noise.delta_b)
            {
                r.warnings.push(format!(
                    "x-only noise needs b_ext well above delta_b, but b_ext = {} and delta_b = {}; use noise_mode = \"3d\"",
                    p.config.b_ext, p.noise.delta_b
                ));
                break;
            }
        }
        let worst = points.iter().map(truncation_estimate).fold(0.0, f64::max);
        r.notes.push(format!("Fock cutoff {}: truncation probability ~{worst:.1e}", spec.base.config.fock_cutoff));
        if worst > TRUNCATION_WARN {
            r.warnings.push(format!(
                "Fock cutoff {} may truncate the cavity field (estimated probability {worst:.1e}); raise fock_cutoff",
                spec.base.config.fock_cutoff
            ));
        }
    }
    if spec.experiment == Experiment::ProtocolA && spec.base.noise.mode == NoiseMode::XOnly {
        r.warnings.push("Protocol A runs at zero field; only full-3d noise is meaningful there".into());
    }
    if spec.sweep.parameter == Param::BExt && spec.optimize_field {
        r.warnings.push("optimize_field is overridden by the b_ext sweep".into());
    }

    let evaluations_per_point = |p: &Point| if p.noise.delta_b == 0.0 { 1.0 } else { spec.samples as f64 };
    let mut seconds: f64 = points
        .iter()
        .map(|p| {
            let per = f1_seconds(p);
            match spec.experiment {
                Experiment::FieldSweep | Experiment::EnsembleF1 | Experiment::ProtocolA => {
                    per * evaluations_per_point(p)
                }
                // Two pulses and an outer regression grid.
                Experiment::EnsembleF2 => 20.0 * per * evaluations_per_point(p),
                _ => 0.0,
            }
        })
        .sum();
    if spec.optimize_field {
        seconds += 20.0 * f1_seconds(&spec.base);
    }
    r.estimated_seconds = seconds;
    r.notes.push(format!("estimated single-threaded runtime ~{}", human_seconds(seconds)));
    r
}

fn human_seconds(s: f64) -> String {
    if s < 1.0 {
        "< 1 s".into()
    } else if s < 120.0 {
        format!("{s:.0} s")
    } else if s < 7200.0 {
        format!("{:.0} min", s / 60.0)
    } else {
        format!("{:.1} h", s / 3600.0)
    }
}
