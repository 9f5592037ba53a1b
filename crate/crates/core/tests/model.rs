use approx::assert_relative_eq;
use proptest::prelude::*;
use qdent_core::model::{
    magnetic_hamiltonian, pulse_envelope, system_hamiltonian, zeeman_eigenstates, CavityModel, PulseTrain,
};
use qdent_core::{CMatrix, FieldVector, OperatorSet, Preset, SystemConfig, C64};

fn herm_err(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

#[test]
fn zeeman_examples() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (p, m) = zeeman_eigenstates(std::f64::consts::FRAC_PI_2, 0.0);
    assert_relative_eq!((p[0] - r).norm() + (p[1] - r).norm(), 0.0, epsilon = 1e-15);
    assert_relative_eq!(m.dotc(&p).norm(), 0.0, epsilon = 1e-15);
    let (p, m) = zeeman_eigenstates(0.0, 0.7);
    assert_relative_eq!(p[0].norm(), 1.0, epsilon = 1e-15);
    assert_relative_eq!(m[1].norm(), 1.0, epsilon = 1e-15);
    let (p, _) = zeeman_eigenstates(std::f64::consts::PI, 0.0);
    assert_relative_eq!(p[1].norm(), 1.0, epsilon = 1e-15);
}

#[test]
fn zeeman_grid_orthonormal() {
    for i in 0..=10 {
        for j in 0..10 {
            let th = std::f64::consts::PI * i as f64 / 10.0;
            let ph = 2.0 * std::f64::consts::PI * j as f64 / 10.0;
            let (p, m) = zeeman_eigenstates(th, ph);
            assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(m.norm(), 1.0, epsilon = 1e-14);
            assert!(p.dotc(&m).norm() < 1e-14);
        }
    }
}

fn sorted_eigs(m: &CMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn magnetic_blocks_and_spectrum() {
    let mut config = SystemConfig::preset(Preset::HighQ);
    config.fock_cutoff = 1;
    let ops = OperatorSet::new(1);
    let pg = ops.ground_projector();
    let pt = ops.trion_projector();
    let field = FieldVector::new(1.0, std::f64::consts::FRAC_PI_2, 0.3);
    let hb = magnetic_hamiltonian(&ops, &field, &config);
    assert!(herm_err(&hb) < 1e-15);
    assert!((&hb * &pg - &pg * &hb).norm() < 1e-14);
    assert!((&hb * &pt - &pt * &hb).norm() < 1e-14);
    // Trion block vanishes in the Voigt geometry.
    assert!((&pt * &hb * &pt).norm() < 1e-14);
    let ground = sorted_eigs(&(&pg * &hb * &pg));
    let cavity_states = ops.dim / 4;
    assert_relative_eq!(ground[0], -0.5, epsilon = 1e-13);
    assert_relative_eq!(ground[ground.len() - 1], 0.5, epsilon = 1e-13);
    assert_eq!(ground.iter().filter(|&&e| (e + 0.5).abs() < 1e-12).count(), cavity_states);

    let tilted = FieldVector::new(2.0, 0.4, 1.1);
    let hb = magnetic_hamiltonian(&ops, &tilted, &config);
    let trion = sorted_eigs(&(&pt * &hb * &pt));
    let expect = 1.5 * config.gh_over_ge * 2.0 * 0.4f64.cos();
    assert_relative_eq!(trion[trion.len() - 1], expect.abs(), epsilon = 1e-12);

    let zero = magnetic_hamiltonian(&ops, &FieldVector::new(0.0, 0.3, 0.2), &config);
    assert!(zero.norm() < 1e-15);
}

#[test]
fn hamiltonian_limits() {
    let mut config = SystemConfig::preset(Preset::HighQ);
    config.eta0 = 0.0;
    config.g = 1e-300;
    let field = config.external_field();
    let model = CavityModel::new(&config, field, PulseTrain::single(&config)).unwrap();
    let ops = &model.ops;
    let hb = magnetic_hamiltonian(ops, &field, &config);
    assert!((system_hamiltonian(0.3, &config, &field).unwrap() - &hb).norm() < 1e-290);

    let config = SystemConfig::preset(Preset::HighQ);
    let far = system_hamiltonian(50.0 * config.t0, &config, &field).unwrap();
    let statics = CavityModel::new(&config, field, PulseTrain::single(&config)).unwrap().h_static;
    assert!((far - statics).norm() < 1e-300);
}

#[test]
fn pulse_envelope_examples() {
    let config = SystemConfig::preset(Preset::HighQ);
    let (e0, t0) = (config.eta0, config.t0);
    assert_relative_eq!(pulse_envelope(2.0, &config, &[2.0]).unwrap(), e0, epsilon = 1e-18);
    assert_relative_eq!(pulse_envelope(2.0 + t0, &config, &[2.0]).unwrap(), e0 * (-1.0f64).exp(), max_relative = 1e-14);
    let d = 6.0 * t0;
    let mid = pulse_envelope(d / 2.0, &config, &[0.0, d]).unwrap();
    assert_relative_eq!(mid, 2.0 * e0 * (-(d / (2.0 * t0)).powi(2)).exp(), max_relative = 1e-14);
    assert!(pulse_envelope(0.0, &config, &[]).is_err());
}

#[test]
fn commutator_below_cutoff() {
    let ops = OperatorSet::new(3);
    for a in [&ops.a_plus, &ops.a_minus] {
        let c = a * a.adjoint() - a.adjoint() * a;
        let n = ops.photon_number();
        for i in 0..ops.dim {
            // Exact on states with fewer than `cutoff` photons in total.
            if n[(i, i)].re < 3.0 - 1e-9 {
                assert_relative_eq!((c[(i, i)] - C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }
}

#[test]
fn config_file_keys() {
    let text = r#"
        g = 6.0
        kappa = 24.0
        eta0 = 0.05
        t0 = 1.3
        gh_over_ge = 0.4
        b_ext = 6.0
        theta = 1.5707963267948966
        phi = 0.0
        fock_cutoff = 2
        input_polarization = [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]
    "#;
    let c: SystemConfig = toml::from_str(text).unwrap();
    c.validate().unwrap();
    assert_eq!(c.fock_cutoff, 2);
    assert_relative_eq!(c.gamma_cav(), 6.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian(
        g in 0.1f64..20.0,
        b in 0.0f64..15.0,
        th in 0.0f64..std::f64::consts::PI,
        ph in 0.0f64..6.28,
        t in -10.0f64..10.0,
        gh in -2.0f64..2.0,
    ) {
        let mut config = SystemConfig::preset(Preset::HighQ);
        config.g = g;
        config.gh_over_ge = gh;
        config.fock_cutoff = 1;
        let field = FieldVector::new(b, th, ph);
        let h = system_hamiltonian(t, &config, &field).unwrap();
        prop_assert!(herm_err(&h) < 1e-12 * (1.0 + h.norm()));
    }
}
