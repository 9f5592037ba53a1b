use approx::assert_relative_eq;
use proptest::prelude::*;
use qdent_core::noise::{
    coherence_decay, coherence_decay_mc, fit_gaussian_decay, mean_difference_lower_bound, polarization_to_spread,
    sample_overhauser, sample_rng, t2_star, EnsembleResult, NoiseMode, OverhauserSample, OverhauserSpec, DELTA_B_MAX,
};
use qdent_core::{Preset, SystemConfig};

#[test]
fn sampled_components_have_requested_moments() {
    let spec = OverhauserSpec::new(0.15, NoiseMode::Full3d).unwrap();
    let n = 20_000;
    let mut sums = [0.0; 3];
    let mut squares = [0.0; 3];
    for i in 0..n {
        let OverhauserSample::Vector(v) = sample_overhauser(&spec, &mut sample_rng(9, i)) else {
            panic!("full-3d spec must draw vectors");
        };
        for k in 0..3 {
            sums[k] += v[k];
            squares[k] += v[k] * v[k];
        }
    }
    for k in 0..3 {
        let mean = sums[k] / n as f64;
        let var = squares[k] / n as f64 - mean * mean;
        // 5σ bands for the sample mean and variance.
        assert!(mean.abs() < 5.0 * 0.15 / (n as f64).sqrt());
        assert!((var - 0.0225).abs() < 5.0 * 0.0225 * (2.0 / n as f64).sqrt());
    }
}

#[test]
fn x_only_shifts_along_external_field() {
    let config = SystemConfig::preset(Preset::HighQ);
    let spec = OverhauserSpec::new(0.2, NoiseMode::XOnly).unwrap();
    let s = sample_overhauser(&spec, &mut sample_rng(1, 0));
    let OverhauserSample::Shift(d) = s else { panic!("x-only spec must draw shifts") };
    let f = s.total_field(&config);
    assert_relative_eq!(f.magnitude_b, config.b_ext + d, epsilon = 1e-15);
    assert_eq!((f.theta, f.phi), (config.theta, config.phi));
}

#[test]
fn spread_validation_and_polarisation_map() {
    assert!(OverhauserSpec::new(DELTA_B_MAX + 1e-9, NoiseMode::XOnly).is_err());
    assert!(OverhauserSpec::new(-1e-9, NoiseMode::XOnly).is_err());
    assert_eq!(polarization_to_spread(0.0, DELTA_B_MAX).unwrap(), DELTA_B_MAX);
    assert_eq!(polarization_to_spread(1.0, DELTA_B_MAX).unwrap(), 0.0);
    assert_relative_eq!(polarization_to_spread(0.75, DELTA_B_MAX).unwrap(), 0.05, epsilon = 1e-15);
    assert!(polarization_to_spread(1.5, DELTA_B_MAX).is_err());
    assert!(t2_star(0.0).is_err());
}

#[test]
fn same_seed_same_draws() {
    let spec = OverhauserSpec::new(0.1, NoiseMode::Full3d).unwrap();
    let a = sample_overhauser(&spec, &mut sample_rng(3, 17));
    let b = sample_overhauser(&spec, &mut sample_rng(3, 17));
    let c = sample_overhauser(&spec, &mut sample_rng(3, 18));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn monte_carlo_decay_fits_t2_star() {
    let delta = 0.2;
    let t2 = t2_star(delta).unwrap();
    assert_relative_eq!(t2, 7.0710678118654755, epsilon = 1e-12);
    let ts: Vec<f64> = (1..=12).map(|k| k as f64 * t2 / 8.0).collect();
    let cs: Vec<f64> = ts.iter().map(|&t| coherence_decay_mc(t, delta, 4000, 2)).collect();
    let fit = fit_gaussian_decay(&ts, &cs).unwrap();
    assert!((fit / t2 - 1.0).abs() < 0.1, "fit {fit}");
    let exact: Vec<f64> = ts.iter().map(|&t| coherence_decay(t, delta)).collect();
    assert_relative_eq!(fit_gaussian_decay(&ts, &exact).unwrap(), t2, max_relative = 1e-12);
    assert_relative_eq!(coherence_decay(t2, delta), (-1.0f64).exp(), max_relative = 1e-14);
}

#[test]
fn welch_bound_matches_hand_computation() {
    let a = EnsembleResult::from_values(vec![1.0, 2.0, 3.0, 4.0], 0, 0).unwrap();
    let b = EnsembleResult::from_values(vec![0.0, 1.0], 0, 0).unwrap();
    // var(a) = 5/3, var(b) = 1/2.
    let se = (5.0 / 3.0 / 4.0 + 0.5 / 2.0f64).sqrt();
    assert_relative_eq!(mean_difference_lower_bound(&a, &b, 1.645), 2.5 - 0.5 - 1.645 * se, epsilon = 1e-14);
    assert_eq!((a.q25, a.median, a.q75), (1.0, 2.0, 3.0));
}

proptest! {
    #[test]
    fn ensemble_mean_stays_in_range(values in prop::collection::vec(0.0f64..1.0, 1..64)) {
        let e = EnsembleResult::from_values(values.clone(), 0, 0).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(e.mean >= lo - 1e-15 && e.mean <= hi + 1e-15);
        prop_assert!(e.q25 <= e.median && e.median <= e.q75);
    }
}
