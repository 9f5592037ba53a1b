mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use qdent_core::fidelity::Spin;
use qdent_core::multiphoton::{
    build_psi_n, ghz_equivalence_certificate, linear_cluster_state, lue_obstruction_check, ReducedDensity,
    SymbolicPhotonState, TermKey,
};
use qdent_core::{CMatrix, CVector, Error, C64};

use common::{g_product_oracle, ket, labelled_dense, labelled_oracle, partial_trace_oracle, projector};

const TOL: f64 = 1e-12;

/// Bitstring `"klm…"` with the first character on qubit 0.
fn idx(bits: &str) -> usize {
    bits.chars().enumerate().fold(0, |acc, (q, c)| acc | (((c == '1') as usize) << q))
}

fn key(spin: Spin, pols: &str, units_of_b: &[i8]) -> TermKey {
    let bits = pols.chars().enumerate().fold(0u32, |acc, (j, c)| acc | (((c == 'V') as u32) << j));
    TermKey { spin, bits, freq: units_of_b.iter().map(|f| 2 * f).collect() }
}

fn mat_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

#[test]
fn symbolic_state_matches_labelled_oracle() {
    for n in 1..=6 {
        let sym = labelled_dense(&build_psi_n(n).unwrap());
        let oracle = labelled_oracle(n);
        assert!((sym - oracle).norm() < TOL, "n = {n}");
    }
}

#[test]
fn erasure_matches_g_product() {
    for n in 1..=6 {
        let erased = build_psi_n(n).unwrap().erase_frequency().unwrap();
        assert_relative_eq!(erased.norm(), 1.0, epsilon = TOL);
        let v = erased.to_dense().unwrap();
        assert!((v - g_product_oracle(n)).norm() < TOL, "n = {n}");
    }
}

#[test]
fn single_photon_terms() {
    let s = build_psi_n(1).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(s.len(), 2);
    assert_relative_eq!((s.amplitude(&key(Spin::Plus, "H", &[0])) - C64::new(r, 0.0)).norm(), 0.0, epsilon = TOL);
    assert_relative_eq!((s.amplitude(&key(Spin::Minus, "V", &[1])) - C64::new(0.0, -r)).norm(), 0.0, epsilon = TOL);
    let e = s.erase_frequency().unwrap();
    assert_relative_eq!((e.amplitude(&key(Spin::Minus, "V", &[])) - C64::new(0.0, -r)).norm(), 0.0, epsilon = TOL);
}

#[test]
fn two_photon_terms() {
    let s = build_psi_n(2).unwrap();
    let expected = [
        (key(Spin::Plus, "HH", &[0, 0]), C64::new(0.5, 0.0)),
        (key(Spin::Minus, "HV", &[0, 1]), C64::new(0.0, -0.5)),
        (key(Spin::Minus, "VH", &[1, 0]), C64::new(0.0, -0.5)),
        (key(Spin::Plus, "VV", &[1, -1]), C64::new(0.5, 0.0)),
    ];
    assert_eq!(s.len(), expected.len());
    for (k, a) in &expected {
        assert_relative_eq!((s.amplitude(k) - a).norm(), 0.0, epsilon = TOL);
    }
    let e = s.erase_frequency().unwrap();
    for (k, a) in &expected {
        let k = TermKey { freq: vec![], ..k.clone() };
        assert_relative_eq!((e.amplitude(&k) - a).norm(), 0.0, epsilon = TOL);
    }
}

#[test]
fn three_photon_parity_split() {
    let s = build_psi_n(3).unwrap();
    for (k, _) in s.terms() {
        let even = k.bits.count_ones() % 2 == 0;
        assert_eq!(k.spin == Spin::Plus, even, "{k:?}");
    }
}

#[test]
fn term_count_and_moduli() {
    for n in 1..=12 {
        let s = build_psi_n(n).unwrap();
        assert_eq!(s.len(), 1 << n);
        let m = 0.5f64.powf(n as f64 / 2.0);
        for (_, a) in s.terms() {
            assert_relative_eq!(a.norm(), m, epsilon = 1e-14);
        }
        assert_relative_eq!(s.norm(), 1.0, epsilon = TOL);
    }
}

#[test]
fn energy_class_invariant_up_to_twelve() {
    for n in 1..=12 {
        let s = build_psi_n(n).unwrap();
        assert_eq!(s.spin_offset_classes().unwrap(), Some(Some(2)), "n = {n}");
        assert!(s.is_energy_protected().unwrap());
    }
}

#[test]
fn reduced_density_matches_oracle() {
    let s = build_psi_n(4).unwrap().erase_frequency().unwrap();
    let v = s.to_dense().unwrap();
    for keep in [vec![0], vec![2], vec![3, 1], vec![0, 4], vec![4, 2, 0]] {
        let r = s.reduced_density(&keep).unwrap();
        assert!(r.is_valid(1e-12));
        assert!(mat_dist(&r.matrix, &partial_trace_oracle(&v, 5, &keep)) < TOL, "{keep:?}");
    }
    assert!(s.reduced_density(&[1, 1]).is_err());
    assert!(s.reduced_density(&[5]).is_err());
    assert!(matches!(build_psi_n(2).unwrap().reduced_density(&[0]), Err(Error::FrequencyLabelsPresent)));
}

#[test]
fn single_qubit_marginals_are_maximally_mixed() {
    let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
    for n in 2..=6 {
        let s = build_psi_n(n).unwrap().erase_frequency().unwrap();
        for q in 0..=n {
            let r = s.reduced_density(&[q]).unwrap();
            assert!(mat_dist(&r.matrix, &half) < TOL, "n = {n}, q = {q}");
            assert_relative_eq!(r.entropy(), 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn pair_marginals_are_bell_mixtures() {
    let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mi = C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
    // Two-qubit kets, first listed qubit most significant.
    let bell = projector(&[ket(&[(0b00, r), (0b11, r)], 4), ket(&[(0b01, r), (0b10, r)], 4)]) * C64::new(0.5, 0.0);
    let rotated =
        projector(&[ket(&[(0b00, r), (0b11, mi)], 4), ket(&[(0b01, r), (0b10, mi)], 4)]) * C64::new(0.5, 0.0);
    for n in 4..=6 {
        let s = build_psi_n(n).unwrap().erase_frequency().unwrap();
        for k in 1..=n {
            let sp = s.reduced_density(&[0, k]).unwrap();
            assert!(mat_dist(&sp.matrix, &rotated) < TOL, "spin-photon n = {n}, k = {k}");
            assert_eq!(sp.rank(1e-10), 2);
            for l in k + 1..=n {
                let pp = s.reduced_density(&[k, l]).unwrap();
                assert!(mat_dist(&pp.matrix, &bell) < TOL, "photons n = {n}, ({k}, {l})");
            }
        }
    }
}

#[test]
fn projection_probabilities() {
    let s = build_psi_n(2).unwrap();
    let (plus, p) = s.project_spin(Spin::Plus).unwrap();
    let (_, m) = s.project_spin(Spin::Minus).unwrap();
    assert_relative_eq!(p + m, 1.0, epsilon = 1e-15);
    assert_relative_eq!(p, 0.5, epsilon = 1e-15);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(plus.len(), 2);
    assert_relative_eq!(plus.amplitude(&key(Spin::Plus, "HH", &[0, 0])).re, r, epsilon = TOL);
    assert_relative_eq!(plus.amplitude(&key(Spin::Plus, "VV", &[1, -1])).re, r, epsilon = TOL);
    let (one, p1) = build_psi_n(1).unwrap().project_spin(Spin::Minus).unwrap();
    assert_relative_eq!(p1, 0.5, epsilon = 1e-15);
    assert_relative_eq!((one.amplitude(&key(Spin::Minus, "V", &[1])) - C64::new(0.0, -1.0)).norm(), 0.0, epsilon = TOL);
}

fn c_prime(parity: u32) -> CVector {
    let mut v = CVector::zeros(8);
    for i in 0..8usize {
        if (i as u32).count_ones() % 2 == parity {
            v[i] = C64::new(0.5, 0.0);
        }
    }
    v
}

#[test]
fn measuring_photon_four_and_spin_leaves_c_prime_plus() {
    let s = build_psi_n(4).unwrap().erase_frequency().unwrap();
    let (rest, p) = s.measure_photons_computational(&[4], &[0, 0]).unwrap();
    assert!(p > 0.0);
    let amps = rest.pure_amplitudes(&[1, 2, 3]).unwrap();
    // pure_amplitudes lists qubit 1 as most significant; c′₊ is symmetric.
    let overlap = c_prime(0).dotc(&amps).norm();
    assert_relative_eq!(overlap, 1.0, epsilon = TOL);
}

#[test]
fn hadamard_maps_c_prime_to_cluster() {
    let h_mid = |v: &CVector| {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = CVector::zeros(8);
        for i in 0..8 {
            let l = (i >> 1) & 1;
            let base = i & !2;
            out[base] += v[i] * s;
            out[base | 2] += v[i] * if l == 0 { s } else { -s };
        }
        out
    };
    let cluster = linear_cluster_state(3).unwrap();
    let c_plus = h_mid(&c_prime(0));
    assert!((&c_plus - &cluster).norm() < TOL);
    let s8 = 1.0 / 8f64.sqrt();
    let c_minus_expected = ket(
        &[
            (idx("000"), C64::new(s8, 0.0)),
            (idx("010"), C64::new(-s8, 0.0)),
            (idx("100"), C64::new(s8, 0.0)),
            (idx("110"), C64::new(s8, 0.0)),
            (idx("001"), C64::new(s8, 0.0)),
            (idx("011"), C64::new(s8, 0.0)),
            (idx("101"), C64::new(s8, 0.0)),
            (idx("111"), C64::new(-s8, 0.0)),
        ],
        8,
    );
    assert!((h_mid(&c_prime(1)) - c_minus_expected).norm() < TOL);
    assert!(c_plus.dotc(&h_mid(&c_prime(1))).norm() < TOL);
    for c in [c_prime(0), c_prime(1), cluster] {
        assert!(ghz_equivalence_certificate(&c).unwrap().is_ghz);
    }
}

#[test]
fn symbolic_hadamard_matches_dense() {
    let s = build_psi_n(3).unwrap().erase_frequency().unwrap();
    let h = s.hadamard(2).unwrap();
    let mut dense = s.to_dense().unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = CVector::zeros(dense.len());
    for i in 0..dense.len() {
        let b = (i >> 2) & 1;
        out[i & !4] += dense[i] * r;
        out[i | 4] += dense[i] * if b == 0 { r } else { -r };
    }
    dense = out;
    assert!((h.to_dense().unwrap() - dense).norm() < TOL);
}

#[test]
fn two_photons_left_in_bell_state() {
    for n in 3..=6 {
        let s = build_psi_n(n).unwrap().erase_frequency().unwrap();
        let keep = [1, n];
        let measured: Vec<usize> = (2..n).collect();
        for outcome in 0..(1u32 << (measured.len() + 1)) {
            let bits: Vec<u8> = (0..=measured.len()).map(|i| ((outcome >> i) & 1) as u8).collect();
            let (rest, p) = s.measure_photons_computational(&measured, &bits).unwrap();
            assert!(p > 0.0);
            let v = rest.pure_amplitudes(&keep).unwrap();
            let r = ReducedDensity { qubits: vec![keep[0]], matrix: partial_trace_oracle(&v, 2, &[1]) };
            assert_relative_eq!(r.entropy(), 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn conditional_three_photon_states_are_ghz_class() {
    for n in 3..=5 {
        let s = build_psi_n(n).unwrap().erase_frequency().unwrap();
        let photons: Vec<usize> = (1..=n).collect();
        for k in 1..=n {
            for l in k + 1..=n {
                for m in l + 1..=n {
                    let measured: Vec<usize> = photons.iter().copied().filter(|p| ![k, l, m].contains(p)).collect();
                    for outcome in 0..(1u32 << (measured.len() + 1)) {
                        let bits: Vec<u8> = (0..=measured.len()).map(|i| ((outcome >> i) & 1) as u8).collect();
                        let (rest, _) = s.measure_photons_computational(&measured, &bits).unwrap();
                        let v = rest.pure_amplitudes(&[k, l, m]).unwrap();
                        let cert = ghz_equivalence_certificate(&v).unwrap();
                        assert!(cert.is_ghz, "n={n} ({k},{l},{m}) outcome {bits:?}: {cert:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn two_photon_state_is_ghz_class() {
    let v = build_psi_n(2).unwrap().erase_frequency().unwrap().to_dense().unwrap();
    let cert = ghz_equivalence_certificate(&v).unwrap();
    assert!(cert.is_ghz, "{cert:?}");
    assert!(cert.residual < 1e-10);
}

#[test]
fn obstruction_for_four_to_six() {
    for n in 4..=6 {
        let o = lue_obstruction_check(n).unwrap();
        assert!(o.holds(1e-10), "{o:?}");
    }
}

#[test]
fn product_and_w_states_fail_certificate() {
    let product = ket(&[(0, C64::new(1.0, 0.0))], 8);
    assert!(!ghz_equivalence_certificate(&product).unwrap().is_ghz);
    let w = 1.0 / 3f64.sqrt();
    let wv = ket(&[(idx("001"), C64::new(w, 0.0)), (idx("010"), C64::new(w, 0.0)), (idx("100"), C64::new(w, 0.0))], 8);
    let c = ghz_equivalence_certificate(&wv).unwrap();
    assert!(!c.is_ghz);
    assert!(c.marginal_deviation > 0.1);
}

fn arb_state() -> impl Strategy<Value = SymbolicPhotonState> {
    (1usize..=5, proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)).prop_map(|(n, amps)| {
        let terms: Vec<(TermKey, C64)> = (0..(1u32 << (n + 1)))
            .map(|i| {
                let key = TermKey { spin: Spin::from_bit((i & 1) as u8), bits: i >> 1, freq: vec![] };
                (key, C64::new(amps[i as usize].0, amps[i as usize].1))
            })
            .collect();
        let norm: f64 = terms.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        let terms = terms.into_iter().map(|(k, a)| (k, a / norm));
        SymbolicPhotonState::from_terms(n, true, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hadamard_preserves_norm(s in arb_state(), picks in proptest::collection::vec(1usize..=5, 1..6)) {
        let mut t = s.clone();
        for p in picks {
            let p = 1 + (p - 1) % s.n_photons();
            t = t.hadamard(p).unwrap();
            prop_assert!((t.norm() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one(s in arb_state(), q in 0usize..=5) {
        let q = q % (s.n_photons() + 1);
        let p: f64 = (0..2u8)
            .map(|o| match s.measure_computational(&[q], &[o]) {
                Ok((_, p)) => p,
                Err(Error::ZeroProbability) => 0.0,
                Err(e) => panic!("{e}"),
            })
            .sum();
        prop_assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip(s in arb_state()) {
        let back = SymbolicPhotonState::from_text(&s.to_text()).unwrap();
        prop_assert_eq!(back.len(), s.len());
        for (k, a) in s.terms() {
            prop_assert!((back.amplitude(k) - a).norm() < 1e-15);
        }
    }

    #[test]
    fn free_evolution_is_invisible(n in 1usize..=6, b in 0.0f64..20.0, t in 0.0f64..100.0) {
        let s = build_psi_n(n).unwrap();
        let evolved = s.free_evolution(b, t).unwrap();
        let (e0, e1) = (s.erase_frequency().unwrap(), evolved.erase_frequency().unwrap());
        for q in 0..=n {
            let d = (e0.reduced_density(&[q]).unwrap().matrix - e1.reduced_density(&[q]).unwrap().matrix).norm();
            prop_assert!(d < 1e-12);
        }
        let pairs = (e0.reduced_density(&[0, n]).unwrap().matrix - e1.reduced_density(&[0, n]).unwrap().matrix).norm();
        prop_assert!(pairs < 1e-12);
        for (k, a) in e0.terms() {
            prop_assert!((e1.amplitude(k).norm() - a.norm()).abs() < 1e-12);
        }
        for spin in [Spin::Plus, Spin::Minus] {
            let (p, _) = s.project_spin(spin).unwrap();
            prop_assert_eq!(p.evolution_fidelity(b, t).unwrap(), 1.0);
        }
    }
}
