//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qdent_core::fidelity::Spin;
use qdent_core::multiphoton::SymbolicPhotonState;
use qdent_core::{CMatrix, CVector, C64};

/// Local photon dimension: polarisation × offset in `{−b, 0, +b}`.
pub const PHOTON_DIM: usize = 6;

fn photon_index(pol: usize, offset_units: i32) -> usize {
    pol + 2 * (offset_units + 1) as usize
}

/// Dense spin ⊗ photons vector with frequency labels: index
/// `s + 2 Σ_j p_j 6^{j−1}`.
pub fn labelled_dense(state: &SymbolicPhotonState) -> CVector {
    let n = state.n_photons();
    let mut v = CVector::zeros(2 * PHOTON_DIM.pow(n as u32));
    for (k, a) in state.terms() {
        let mut idx = k.spin.bit() as usize;
        let mut stride = 2;
        for j in 0..n {
            assert_eq!(k.freq[j] % 2, 0, "oracle handles whole units of b only");
            let pol = ((k.bits >> j) & 1) as usize;
            idx += stride * photon_index(pol, k.freq[j] as i32 / 2);
            stride *= PHOTON_DIM;
        }
        v[idx] += *a;
    }
    v
}

/// 12×2 isometry spin → spin ⊗ new photon, rows `s' + 2p`.
fn scattering_isometry() -> DMatrix<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = DMatrix::zeros(2 * PHOTON_DIM, 2);
    let (plus, minus) = (Spin::Plus.bit() as usize, Spin::Minus.bit() as usize);
    w[(plus + 2 * photon_index(0, 0), plus)] = C64::new(r, 0.0);
    w[(minus + 2 * photon_index(1, 1), plus)] = C64::new(0.0, -r);
    w[(minus + 2 * photon_index(0, 0), minus)] = C64::new(r, 0.0);
    w[(plus + 2 * photon_index(1, -1), minus)] = C64::new(0.0, r);
    w
}

/// `n` photons scattered from `|φ₊⟩` by brute-force application of the
/// labelled isometry on the full dense space.
pub fn labelled_oracle(n: usize) -> CVector {
    let w = scattering_isometry();
    let mut v = CVector::zeros(2);
    v[Spin::Plus.bit() as usize] = C64::new(1.0, 0.0);
    for j in 0..n {
        let stride = PHOTON_DIM.pow(j as u32);
        let mut out = CVector::zeros(v.len() * PHOTON_DIM);
        for (old, &a) in v.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let (s, rest) = (old % 2, old / 2);
            for row in 0..2 * PHOTON_DIM {
                let c = w[(row, s)];
                if c != C64::new(0.0, 0.0) {
                    let (s2, p) = (row % 2, row / 2);
                    out[s2 + 2 * (rest + stride * p)] += c * a;
                }
            }
        }
        v = out;
    }
    v
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
}

/// `⊗_q m_q` with qubit 0 least significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = f.kronecker(&out);
    }
    out
}

/// `Π_j (1 − Y_spin X_j)/√2 |0…0⟩` on `n + 1` qubits.
pub fn g_product_oracle(n: usize) -> CVector {
    let nq = n + 1;
    let dim = 1 << nq;
    let id = CMatrix::identity(dim, dim);
    let mut v = CVector::zeros(dim);
    v[0] = C64::new(1.0, 0.0);
    for j in 1..=n {
        let factors: Vec<CMatrix> = (0..nq)
            .map(|q| match q {
                0 => pauli_y(),
                q if q == j => pauli_x(),
                _ => CMatrix::identity(2, 2),
            })
            .collect();
        let g = (&id - kron_all(&factors)) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v = g * v;
    }
    v
}

/// Partial trace by explicit sum over the complementary basis, first kept
/// qubit most significant.
pub fn partial_trace_oracle(v: &CVector, nq: usize, keep: &[usize]) -> CMatrix {
    let k = keep.len();
    let mut rho = CMatrix::zeros(1 << k, 1 << k);
    for i in 0..v.len() {
        for j in 0..v.len() {
            let rest_equal = (0..nq).filter(|q| !keep.contains(q)).all(|q| (i >> q) & 1 == (j >> q) & 1);
            if !rest_equal {
                continue;
            }
            let si = keep.iter().fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1));
            let sj = keep.iter().fold(0, |acc, &q| (acc << 1) | ((j >> q) & 1));
            rho[(si, sj)] += v[i] * v[j].conj();
        }
    }
    rho
}

pub fn projector(states: &[CVector]) -> CMatrix {
    let d = states[0].len();
    let mut m = CMatrix::zeros(d, d);
    for s in states {
        m += s * s.adjoint();
    }
    m
}

pub fn ket(amps: &[(usize, C64)], dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    for &(i, a) in amps {
        v[i] = a;
    }
    v
}
