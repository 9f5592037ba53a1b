use std::time::Instant;

use nalgebra::Vector4;
use qdent_core::fidelity::{
    fidelity_one_photon_with, optimal_field, two::two_photon_elements, FidelityOptions, IdealOne, IdealTwo,
};
use qdent_core::multiphoton::{build_psi_n, ghz_equivalence_certificate, lue_obstruction_check};
use qdent_core::noise::{ensemble_fidelity, EnsembleResult};
use qdent_core::protocols::{
    present_vs_b_comparison, protocol_a_fidelity, protocol_a_target, protocol_b_fidelity, protocol_b_fidelity_mc,
    pure_target, ComparisonParams, ProtocolBParams,
};
use qdent_core::{FieldVector, C64};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::spec::{Experiment, ExperimentSpec, Point};
use crate::CliError;

/// GHZ and LUE scans enumerate every measurement pattern; skip them past this.
const MAX_SCAN_PHOTONS: usize = 8;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct RunOutput {
    /// The experiment after field optimisation, as actually run.
    pub resolved: ExperimentSpec,
    pub table: Table,
    pub point_wall_times: Vec<f64>,
    pub warnings: Vec<String>,
    /// Quantities derived before the sweep (optimised field, targets).
    pub derived: Map<String, Value>,
}

fn sim(e: qdent_core::Error) -> CliError {
    CliError::Simulation(e)
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const ENSEMBLE_COLUMNS: [&str; 11] =
    ["b_ext", "delta_b", "noise_mode", "mean", "std_error", "q25", "median", "q75", "n", "failures", "seed"];

fn ensemble_cells(p: &Point, e: &EnsembleResult) -> Vec<String> {
    vec![
        num(p.config.b_ext),
        num(p.noise.delta_b),
        p.noise.mode.to_string(),
        num(e.mean),
        num(e.std_error()),
        num(e.q25),
        num(e.median),
        num(e.q75),
        e.n.to_string(),
        e.failures.to_string(),
        e.seed.to_string(),
    ]
}

/// Runs `f` over the sweep points in parallel; rows come back in sweep order.
fn sweep_rows<F>(spec: &ExperimentSpec, f: F) -> Result<(Vec<Vec<String>>, Vec<f64>, Vec<String>), CliError>
where
    F: Fn(usize, &Point) -> Result<(Vec<String>, Option<String>), CliError> + Sync,
{
    let results: Vec<Result<(Vec<String>, Option<String>, f64), CliError>> = spec
        .sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let start = Instant::now();
            let point = spec.base.with(spec.sweep.parameter, v)?;
            let (mut row, warning) = f(i, &point)?;
            row.insert(0, num(v));
            Ok((row, warning, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut times = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for r in results {
        let (row, w, t) = r?;
        rows.push(row);
        times.push(t);
        warnings.extend(w);
    }
    Ok((rows, times, warnings))
}

fn ensemble<F>(spec: &ExperimentSpec, p: &Point, f: F) -> Result<(Vec<String>, Option<String>), CliError>
where
    F: Fn(&FieldVector) -> qdent_core::Result<f64> + Sync,
{
    // Without noise every sample would be the same single shot.
    let n = if p.noise.delta_b == 0.0 { 1 } else { spec.samples };
    let e = ensemble_fidelity(&p.config, &p.noise, n, spec.seed, f).map_err(sim)?;
    let warning = (e.failures > 0).then(|| {
        format!(
            "b_ext = {}, delta_b = {}: {} of {n} samples failed and were excluded",
            p.config.b_ext, p.noise.delta_b, e.failures
        )
    });
    Ok((ensemble_cells(p, &e), warning))
}

/// The swept value leads each row as `sweep_<parameter>`.
fn header(spec: &ExperimentSpec, columns: &[&str]) -> Vec<String> {
    std::iter::once(format!("sweep_{}", spec.sweep.parameter.name()))
        .chain(columns.iter().map(|c| c.to_string()))
        .collect()
}

fn c64_pairs(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn run(spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let mut resolved = spec.clone();
    let mut derived = Map::new();
    let opts: FidelityOptions = spec.numerics;

    if spec.optimize_field {
        let c = &spec.base.config;
        let g = c.gamma_cav();
        let best = optimal_field(c, &IdealOne::default(), &opts, (0.3 * g, 3.0 * g), 1e-3 * g).map_err(sim)?;
        log::info!("noise-free F1 optimum at b_ext = {} (F1 = {})", best.b_ext, best.fidelity);
        resolved.base.config.b_ext = best.b_ext;
        derived.insert("optimal_field".into(), serde_json::to_value(best).expect("plain data"));
    }
    let spec = &resolved;

    let (header, (rows, times, warnings)) = match spec.experiment {
        Experiment::FieldSweep | Experiment::EnsembleF1 => {
            let rows = sweep_rows(spec, |_, p| {
                ensemble(spec, p, |f| Ok(fidelity_one_photon_with(&IdealOne::default(), &p.config, f, &opts)?.value))
            })?;
            (header(spec, &ENSEMBLE_COLUMNS), rows)
        }
        Experiment::EnsembleF2 => {
            let target = if spec.calibrate_target {
                let b = &spec.base;
                let e = two_photon_elements(&b.config, &b.config.external_field(), b.tau, &opts).map_err(sim)?;
                e.calibrated_target(&IdealTwo::default())
            } else {
                IdealTwo::default()
            };
            derived.insert(
                "two_photon_target".into(),
                c64_pairs(&[target.alpha, target.beta, target.gamma, target.delta]),
            );
            let rows = sweep_rows(spec, |_, p| {
                let (mut cells, w) =
                    ensemble(spec, p, |f| Ok(two_photon_elements(&p.config, f, p.tau, &opts)?.fidelity(&target)))?;
                cells.insert(0, num(p.tau));
                Ok((cells, w))
            })?;
            let mut columns = vec!["tau"];
            columns.extend(ENSEMBLE_COLUMNS);
            (header(spec, &columns), rows)
        }
        Experiment::ProtocolA => {
            let target = match spec.protocol_a_target {
                Some(t) => {
                    let v = Vector4::from_iterator(t.iter().map(|&[re, im]| C64::new(re, im)));
                    pure_target(&v).map_err(sim)?
                }
                None => protocol_a_target(&spec.base.config, &opts).map_err(sim)?,
            };
            derived.insert(
                "protocol_a_target_row_major".into(),
                c64_pairs(&target.transpose().iter().copied().collect::<Vec<_>>()),
            );
            let rows = sweep_rows(spec, |_, p| {
                ensemble(spec, p, |f| Ok(protocol_a_fidelity(&p.config, f, &target, &opts)?.value))
            })?;
            (header(spec, &ENSEMBLE_COLUMNS), rows)
        }
        Experiment::ProtocolB => {
            let rows = sweep_rows(spec, |i, p| {
                let params =
                    ProtocolBParams { b_ext: p.config.b_ext, delta_b: p.noise.delta_b, t: p.t, n_photons: p.n_photons };
                let exact = protocol_b_fidelity(&params).map_err(sim)?;
                let seed = spec.seed.wrapping_add(i as u64);
                let mc = protocol_b_fidelity_mc(&params, spec.samples, seed).map_err(sim)?;
                Ok((
                    vec![
                        num(p.t),
                        num(p.config.b_ext),
                        num(p.noise.delta_b),
                        p.n_photons.to_string(),
                        num(exact),
                        num(mc.mean),
                        num(mc.std_error()),
                        mc.n.to_string(),
                        seed.to_string(),
                    ],
                    None,
                ))
            })?;
            let columns =
                ["t", "b_ext", "delta_b", "n_photons", "f_analytic", "f_mc", "f_mc_std_error", "mc_samples", "seed"];
            (header(spec, &columns), rows)
        }
        Experiment::Compare => {
            let rows = sweep_rows(spec, |i, p| {
                let params = ComparisonParams {
                    b_ext: p.config.b_ext,
                    delta_b: p.noise.delta_b,
                    n_photons: p.n_photons,
                    mc_samples: spec.samples,
                    seed: spec.seed.wrapping_add(i as u64),
                };
                let r = present_vs_b_comparison(&[p.t], &params).map_err(sim)?[0];
                Ok((
                    vec![
                        num(r.t),
                        num(r.f_present),
                        num(r.f_b_analytic),
                        opt_num(r.f_b_mc),
                        opt_num(r.f_b_mc_std_error),
                        opt_num(r.f_c),
                    ],
                    None,
                ))
            })?;
            let columns =
                ["t", "f_present", "f_protocol_b_analytic", "f_protocol_b_mc", "f_protocol_b_mc_std_error", "f_protocol_c"];
            (header(spec, &columns), rows)
        }
        Experiment::Multiphoton => {
            let rows = sweep_rows(spec, |_, p| Ok((multiphoton_row(p.n_photons).map_err(sim)?, None)))?;
            let columns = [
                "terms",
                "energy_protected",
                "min_qubit_entropy",
                "ghz_certified",
                "ghz_measurements",
                "lue_obstruction",
            ];
            (header(spec, &columns), rows)
        }
    };
    Ok(RunOutput {
        resolved: resolved.clone(),
        table: Table { header, rows },
        point_wall_times: times,
        warnings,
        derived,
    })
}

fn multiphoton_row(n: usize) -> qdent_core::Result<Vec<String>> {
    let psi = build_psi_n(n)?;
    let protected = psi.is_energy_protected()?;
    let erased = psi.erase_frequency()?;
    let min_entropy = (0..=n)
        .map(|q| erased.reduced_density(&[q]).map(|r| r.entropy()))
        .collect::<qdent_core::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let (mut certified, mut tried) = (String::new(), String::new());
    if (3..=MAX_SCAN_PHOTONS).contains(&n) {
        let (mut ok, mut total) = (0usize, 0usize);
        for kept in 0u32..(1 << n) {
            if kept.count_ones() != 3 {
                continue;
            }
            let keep: Vec<usize> = (1..=n).filter(|p| kept >> (p - 1) & 1 == 1).collect();
            let measured: Vec<usize> = (1..=n).filter(|p| kept >> (p - 1) & 1 == 0).collect();
            for outcome in 0u32..(1 << (measured.len() + 1)) {
                let bits: Vec<u8> = (0..=measured.len()).map(|i| (outcome >> i & 1) as u8).collect();
                let (rest, _) = erased.measure_photons_computational(&measured, &bits)?;
                total += 1;
                ok += ghz_equivalence_certificate(&rest.pure_amplitudes(&keep)?)?.is_ghz as usize;
            }
        }
        certified = ok.to_string();
        tried = total.to_string();
    }
    let lue = if (4..=MAX_SCAN_PHOTONS).contains(&n) {
        lue_obstruction_check(n)?.holds(1e-10).to_string()
    } else {
        String::new()
    };
    Ok(vec![psi.len().to_string(), protected.to_string(), num(min_entropy), certified, tried, lue])
}
