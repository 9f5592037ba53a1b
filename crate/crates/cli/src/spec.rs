use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qdent_core::engine::Tolerances;
use qdent_core::fidelity::FidelityOptions;
use qdent_core::noise::{polarization_to_spread, t2_star, NoiseMode, OverhauserSpec, DELTA_B_MAX};
use qdent_core::{Preset, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FieldSweep,
    EnsembleF1,
    EnsembleF2,
    ProtocolA,
    ProtocolB,
    Compare,
    Multiphoton,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::FieldSweep => "field-sweep",
            Experiment::EnsembleF1 => "ensemble-f1",
            Experiment::EnsembleF2 => "ensemble-f2",
            Experiment::ProtocolA => "protocol-a",
            Experiment::ProtocolB => "protocol-b",
            Experiment::Compare => "compare",
            Experiment::Multiphoton => "multiphoton",
        }
    }

    fn default_parameter(self) -> Param {
        match self {
            Experiment::FieldSweep => Param::BExt,
            Experiment::EnsembleF1 | Experiment::EnsembleF2 | Experiment::ProtocolA => Param::DeltaB,
            Experiment::ProtocolB | Experiment::Compare => Param::T,
            Experiment::Multiphoton => Param::NPhotons,
        }
    }

    fn allows(self, p: Param) -> bool {
        use Param::*;
        match self {
            Experiment::FieldSweep | Experiment::EnsembleF1 => !matches!(p, Tau | T | NPhotons),
            // Protocol A runs at zero external field by definition.
            Experiment::ProtocolA => !matches!(p, BExt | Tau | T | NPhotons),
            Experiment::EnsembleF2 => !matches!(p, T | NPhotons),
            Experiment::ProtocolB | Experiment::Compare => matches!(p, T | BExt | DeltaB | Polarization),
            Experiment::Multiphoton => p == NPhotons,
        }
    }

    /// Ensemble experiments that default to the noise-free F⁽¹⁾ optimum.
    fn optimizes_field_by_default(self) -> bool {
        matches!(self, Experiment::EnsembleF1 | Experiment::EnsembleF2)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantities a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    BExt,
    Theta,
    Phi,
    G,
    Kappa,
    Eta0,
    T0,
    GhOverGe,
    DeltaB,
    /// Nuclear polarisation, mapped linearly onto `delta_b`.
    Polarization,
    Tau,
    T,
    NPhotons,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::BExt => "b_ext",
            Param::Theta => "theta",
            Param::Phi => "phi",
            Param::G => "g",
            Param::Kappa => "kappa",
            Param::Eta0 => "eta0",
            Param::T0 => "t0",
            Param::GhOverGe => "gh_over_ge",
            Param::DeltaB => "delta_b",
            Param::Polarization => "polarization",
            Param::Tau => "tau",
            Param::T => "t",
            Param::NPhotons => "n_photons",
        }
    }
}

impl FromStr for Param {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let all = [
            Param::BExt,
            Param::Theta,
            Param::Phi,
            Param::G,
            Param::Kappa,
            Param::Eta0,
            Param::T0,
            Param::GhOverGe,
            Param::DeltaB,
            Param::Polarization,
            Param::Tau,
            Param::T,
            Param::NPhotons,
        ];
        all.into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown sweep parameter '{s}'")))
    }
}

/// One fully specified evaluation point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    pub config: SystemConfig,
    pub noise: OverhauserSpec,
    pub tau: f64,
    pub t: f64,
    pub n_photons: usize,
}

impl Point {
    pub fn with(&self, p: Param, v: f64) -> Result<Point, CliError> {
        let mut out = self.clone();
        let c = &mut out.config;
        match p {
            Param::BExt => c.b_ext = v,
            Param::Theta => c.theta = v,
            Param::Phi => c.phi = v,
            Param::G => c.g = v,
            Param::Kappa => c.kappa = v,
            Param::Eta0 => c.eta0 = v,
            Param::T0 => c.t0 = v,
            Param::GhOverGe => c.gh_over_ge = v,
            Param::DeltaB => out.noise = OverhauserSpec::new(v, out.noise.mode)?,
            Param::Polarization => out.noise = OverhauserSpec::from_polarization(v, out.noise.mode)?,
            Param::Tau => out.tau = v,
            Param::T => out.t = v,
            Param::NPhotons => {
                if v.fract() != 0.0 || v < 1.0 {
                    return Err(CliError::Config(format!("n_photons must be a positive integer (got {v})")));
                }
                out.n_photons = v as usize;
            }
        }
        out.config.validate()?;
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    parameter: Option<String>,
    values: Option<Vec<f64>>,
    /// `[start, stop, points]`, endpoints included.
    linspace: Option<(f64, f64, usize)>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsFile {
    rtol: Option<f64>,
    atol: Option<f64>,
    max_steps: Option<usize>,
    oversample: Option<f64>,
    outer_points_per_t0: Option<f64>,
    outer_half_width: Option<f64>,
}

/// The experiment file as written on disk.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    experiment: Experiment,
    preset: Option<Preset>,
    #[serde(default)]
    system: toml::Table,
    seed: Option<u64>,
    samples: Option<usize>,
    out: Option<PathBuf>,
    noise_mode: Option<NoiseMode>,
    polarization: Option<f64>,
    delta_b: Option<f64>,
    /// Pulse separation for two-photon runs (ns); defaults to `3 t0`.
    tau: Option<f64>,
    n_photons: Option<usize>,
    optimize_field: Option<bool>,
    calibrate_target: Option<bool>,
    /// Pure Protocol A target in the `{Hφ₊, Vφ₋, Hφ₋, Vφ₊}` basis as
    /// `[re, im]` pairs.
    protocol_a_target: Option<[[f64; 2]; 4]>,
    #[serde(default)]
    sweep: SweepFile,
    #[serde(default)]
    numerics: NumericsFile,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub noise_mode: Option<NoiseMode>,
    pub polarization: Option<f64>,
    pub delta_b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: Param,
    pub values: Vec<f64>,
}

/// A resolved experiment: every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub preset: Preset,
    pub base: Point,
    pub sweep: Sweep,
    pub seed: u64,
    pub samples: usize,
    pub out: PathBuf,
    pub optimize_field: bool,
    pub calibrate_target: bool,
    pub protocol_a_target: Option<[[f64; 2]; 4]>,
    pub numerics: FidelityOptions,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLES: usize = 200;

fn merge(base: &SystemConfig, overrides: &toml::Table) -> Result<SystemConfig, CliError> {
    let mut table = toml::Table::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    let config: SystemConfig = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentSpec {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, ov)
    }

    pub fn parse(text: &str, ov: &Overrides) -> Result<Self, CliError> {
        let file: SpecFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let experiment = file.experiment;
        let preset = ov.preset.or(file.preset).unwrap_or(Preset::HighQ);
        let mut config = merge(&SystemConfig::preset(preset), &file.system)?;

        let mode = ov.noise_mode.or(file.noise_mode).unwrap_or(match experiment {
            Experiment::ProtocolA => NoiseMode::Full3d,
            _ => NoiseMode::XOnly,
        });
        let delta_b = match (ov.delta_b, ov.polarization, file.delta_b, file.polarization) {
            (Some(d), _, _, _) => d,
            (None, Some(p), _, _) => polarization_to_spread(p, DELTA_B_MAX)?,
            (None, None, Some(d), _) => d,
            (None, None, None, Some(p)) => polarization_to_spread(p, DELTA_B_MAX)?,
            _ => 0.0,
        };
        let noise = OverhauserSpec::new(delta_b, mode)?;
        if experiment == Experiment::ProtocolA {
            config.b_ext = 0.0;
        }

        let n_photons = file.n_photons.unwrap_or(2);
        if matches!(experiment, Experiment::ProtocolB | Experiment::Compare) && !(2..=3).contains(&n_photons) {
            return Err(CliError::Config(format!("{experiment} needs n_photons = 2 or 3 (got {n_photons})")));
        }
        let tau = file.tau.unwrap_or(3.0 * config.t0);
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(CliError::Config(format!("tau must be > 0 (got {tau})")));
        }

        let mut numerics = FidelityOptions::default();
        let n = &file.numerics;
        numerics.tolerances = Tolerances {
            rtol: n.rtol.unwrap_or(numerics.tolerances.rtol),
            atol: n.atol.unwrap_or(numerics.tolerances.atol),
            max_steps: n.max_steps.unwrap_or(numerics.tolerances.max_steps),
            h_max: None,
        };
        numerics.oversample = n.oversample.unwrap_or(numerics.oversample);
        numerics.outer_points_per_t0 = n.outer_points_per_t0.unwrap_or(numerics.outer_points_per_t0);
        numerics.outer_half_width = n.outer_half_width.unwrap_or(numerics.outer_half_width);
        let positive = [
            ("rtol", numerics.tolerances.rtol),
            ("atol", numerics.tolerances.atol),
            ("oversample", numerics.oversample),
            ("outer_points_per_t0", numerics.outer_points_per_t0),
            ("outer_half_width", numerics.outer_half_width),
        ];
        if let Some((k, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(CliError::Config(format!("numerics.{k} must be > 0 (got {v})")));
        }

        let base = Point { config, noise, tau, t: 0.0, n_photons };
        let sweep = resolve_sweep(experiment, &file.sweep, &base)?;
        // Every sweep point must resolve before anything runs.
        for &v in &sweep.values {
            base.with(sweep.parameter, v)?;
        }

        let samples = ov.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 && experiment != Experiment::Multiphoton && experiment != Experiment::Compare {
            return Err(CliError::Config("samples must be >= 1".into()));
        }
        if let Some(t) = &file.protocol_a_target {
            let norm: f64 = t.iter().map(|[re, im]| re * re + im * im).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(CliError::Config(format!("protocol_a_target must be normalised (norm² {norm})")));
            }
        }
        Ok(ExperimentSpec {
            experiment,
            preset,
            base,
            sweep,
            seed: ov.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            samples,
            out: ov.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(format!("out/{experiment}"))),
            optimize_field: file.optimize_field.unwrap_or(experiment.optimizes_field_by_default()),
            calibrate_target: file.calibrate_target.unwrap_or(true),
            protocol_a_target: file.protocol_a_target,
            numerics,
        })
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

fn resolve_sweep(experiment: Experiment, file: &SweepFile, base: &Point) -> Result<Sweep, CliError> {
    let parameter = match &file.parameter {
        Some(s) => s.parse()?,
        None => experiment.default_parameter(),
    };
    if !experiment.allows(parameter) {
        return Err(CliError::Config(format!("{experiment} cannot sweep '{}'", parameter.name())));
    }
    let values = match (&file.values, file.linspace) {
        (Some(_), Some(_)) => return Err(CliError::Config("give sweep.values or sweep.linspace, not both".into())),
        (Some(v), None) => v.clone(),
        (None, Some((a, b, n))) => linspace(a, b, n),
        (None, None) => default_values(experiment, parameter, base).ok_or_else(|| {
            CliError::Config(format!("sweep over '{}' needs sweep.values or sweep.linspace", parameter.name()))
        })?,
    };
    if values.is_empty() {
        return Err(CliError::Config("sweep has no values".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("sweep value {v} is not finite")));
    }
    Ok(Sweep { parameter, values })
}

fn default_values(experiment: Experiment, parameter: Param, base: &Point) -> Option<Vec<f64>> {
    let g = base.config.gamma_cav();
    Some(match (experiment, parameter) {
        (Experiment::FieldSweep, Param::BExt) => (1..=20).map(|k| 0.15 * g * k as f64).collect(),
        (Experiment::Multiphoton, _) => (1..=6).map(f64::from).collect(),
        (_, Param::T) => {
            // Three dephasing times, or 30 ns without noise.
            let scale = t2_star(base.noise.delta_b).unwrap_or(10.0);
            linspace(0.0, 3.0 * scale, 31)
        }
        (_, Param::DeltaB) => vec![base.noise.delta_b],
        (_, Param::Tau) => vec![base.tau],
        _ => return None,
    })
}
