use nalgebra::{Matrix2, Vector2, Vector4};

use super::build_psi_n;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// Density matrix of a subset of qubits; `qubits[0]` is the most
/// significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity {
    pub qubits: Vec<usize>,
    pub matrix: CMatrix,
}

impl ReducedDensity {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues().iter().filter(|&&l| l > 1e-15).map(|&l| -l * l.log2()).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > tol).count()
    }

    /// Frobenius distance from the maximally mixed state.
    pub fn distance_from_maximally_mixed(&self) -> f64 {
        let d = self.matrix.nrows();
        let id = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
        (&self.matrix - id).norm()
    }

    /// Hermitian, unit trace, positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (&self.matrix - self.matrix.adjoint()).norm() <= tol;
        let tr = (self.matrix.trace() - C64::new(1.0, 0.0)).norm() <= tol;
        herm && tr && self.eigenvalues().iter().all(|&l| l >= -tol)
    }
}

/// Partial trace of a dense `nq`-qubit vector (qubit `q` = index bit `q`)
/// onto `qubits`, first listed most significant. Not normalised.
pub fn reduced_density_dense(v: &CVector, nq: usize, qubits: &[usize]) -> CMatrix {
    let k = qubits.len();
    let rest: Vec<usize> = (0..nq).filter(|q| !qubits.contains(q)).collect();
    let mut m = CMatrix::zeros(1 << k, 1 << rest.len());
    for (i, &a) in v.iter().enumerate() {
        if a == C64::new(0.0, 0.0) {
            continue;
        }
        let s = qubits.iter().fold(0usize, |acc, &q| (acc << 1) | ((i >> q) & 1));
        let r = rest.iter().enumerate().fold(0usize, |acc, (j, &q)| acc | (((i >> q) & 1) << j));
        m[(s, r)] = a;
    }
    &m * m.adjoint()
}

/// Applies a single-qubit gate to qubit `q` of a dense vector.
pub(crate) fn apply_gate(v: &CVector, q: usize, u: &Matrix2<C64>) -> CVector {
    let mut out = v.clone();
    let bit = 1usize << q;
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a0, a1) = (v[i], v[i | bit]);
            out[i] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            out[i | bit] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
    }
    out
}

/// Outcome of the GHZ-class test on a three-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct GhzCertificate {
    pub is_ghz: bool,
    /// Local unitaries (qubit 0 first) with `(U₀⊗U₁⊗U₂)ψ = (|000⟩+|111⟩)/√2`.
    pub witness: Option<[Matrix2<C64>; 3]>,
    /// `‖(U₀⊗U₁⊗U₂)ψ − GHZ‖`, infinite without a witness.
    pub residual: f64,
    /// Largest distance of a single-qubit marginal from `1/2`.
    pub marginal_deviation: f64,
    /// Entropy (bits) of each qubit against the other two.
    pub entropies: [f64; 3],
}

const CERT_TOL: f64 = 1e-10;

fn ghz3() -> CVector {
    let mut g = CVector::zeros(8);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    g[0] = C64::new(r, 0.0);
    g[7] = C64::new(r, 0.0);
    g
}

/// Writes a rank-one 2×2 matrix as `b cᵀ`.
fn rank_one_factors(p: &Matrix2<C64>) -> (Vector2<C64>, Vector2<C64>) {
    let (mut i, mut j) = (0, 0);
    for r in 0..2 {
        for c in 0..2 {
            if p[(r, c)].norm() > p[(i, j)].norm() {
                (i, j) = (r, c);
            }
        }
    }
    let b = p.column(j) / p[(i, j)];
    let c = p.row(i).transpose();
    (b, c)
}

fn projector_rows(k0: Vector2<C64>, k1: Vector2<C64>) -> Matrix2<C64> {
    Matrix2::new(k0[0].conj(), k0[1].conj(), k1[0].conj(), k1[1].conj())
}

/// GHZ-class test for a normalised three-qubit state: maximally mixed
/// marginals, one ebit across every cut, and an explicit set of local
/// unitaries reaching `(|000⟩+|111⟩)/√2`.
pub fn ghz_equivalence_certificate(psi: &CVector) -> Result<GhzCertificate> {
    if psi.len() != 8 {
        return Err(Error::DimensionMismatch { expected: 8, found: psi.len() });
    }
    let nrm = psi.norm();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(nrm));
    }
    let mut marginal_deviation: f64 = 0.0;
    let mut entropies = [0.0; 3];
    for q in 0..3 {
        let r = ReducedDensity { qubits: vec![q], matrix: reduced_density_dense(psi, 3, &[q]) };
        marginal_deviation = marginal_deviation.max(r.distance_from_maximally_mixed());
        entropies[q] = r.entropy();
    }
    let (witness, residual) = match ghz_witness(psi) {
        Some(w) => {
            let mut out = psi.clone();
            for (q, g) in w.iter().enumerate() {
                out = apply_gate(&out, q, g);
            }
            let unitarity = w.iter().map(|g| (g * g.adjoint() - Matrix2::identity()).norm()).fold(0.0, f64::max);
            let res = (out - ghz3()).norm();
            if unitarity <= CERT_TOL {
                (Some(w), res)
            } else {
                (None, f64::INFINITY)
            }
        }
        None => (None, f64::INFINITY),
    };
    let is_ghz = marginal_deviation <= CERT_TOL
        && entropies.iter().all(|e| (e - 1.0).abs() <= 1e-8)
        && residual <= CERT_TOL;
    Ok(GhzCertificate { is_ghz, witness: if is_ghz { witness } else { None }, residual, marginal_deviation, entropies })
}

/// Splits the state as `|0⟩A₀ + |1⟩A₁` over qubit 0; the two product
/// matrices in `span{A₀, A₁}` are the roots of `det(A₀ + tA₁)` and their
/// factors give the local bases.
fn ghz_witness(psi: &CVector) -> Option<[Matrix2<C64>; 3]> {
    // A_i[(b1, b2)] = ψ[i + 2 b1 + 4 b2]
    let slice = |i: usize| Matrix2::new(psi[i], psi[i + 4], psi[i + 2], psi[i + 6]);
    let (a0, a1) = (slice(0), slice(1));
    let d0 = a0.determinant();
    let d1 = a1.determinant();
    let cross = a0[(0, 0)] * a1[(1, 1)] + a1[(0, 0)] * a0[(1, 1)] - a0[(0, 1)] * a1[(1, 0)] - a1[(0, 1)] * a0[(1, 0)];
    let eps = 1e-12;
    let products: [Matrix2<C64>; 2] = if d1.norm() > eps {
        let disc = (cross * cross - d0 * d1 * 4.0).sqrt();
        if disc.norm() <= eps {
            return None;
        }
        let t0 = (-cross + disc) / (d1 * 2.0);
        let t1 = (-cross - disc) / (d1 * 2.0);
        [a0 + a1 * t0, a0 + a1 * t1]
    } else if cross.norm() > eps {
        [a1, a0 - a1 * (d0 / cross)]
    } else {
        return None;
    };

    // Coordinates of A₀, A₁ in the product basis.
    let basis = nalgebra::Matrix4x2::from_columns(&[
        Vector4::from_iterator(products[0].iter().copied()),
        Vector4::from_iterator(products[1].iter().copied()),
    ]);
    let gram_inv = (basis.adjoint() * basis).try_inverse()?;
    let coords = |a: &Matrix2<C64>| gram_inv * basis.adjoint() * Vector4::from_iterator(a.iter().copied());
    let (u, v) = (coords(&a0), coords(&a1));

    let mut lambda = [C64::new(0.0, 0.0); 2];
    let mut ka = [Vector2::zeros(); 2];
    let mut kb = [Vector2::zeros(); 2];
    let mut kc = [Vector2::zeros(); 2];
    for k in 0..2 {
        let a = Vector2::new(u[k], v[k]);
        let (b, c) = rank_one_factors(&products[k]);
        let (na, nb, nc) = (a.norm(), b.norm(), c.norm());
        if na * nb * nc <= eps {
            return None;
        }
        lambda[k] = C64::new(na * nb * nc, 0.0);
        ka[k] = a / C64::new(na, 0.0);
        kb[k] = b / C64::new(nb, 0.0);
        kc[k] = c / C64::new(nc, 0.0);
    }
    let mut u0 = projector_rows(ka[0], ka[1]);
    for k in 0..2 {
        let ph = C64::from_polar(1.0, -lambda[k].arg());
        u0[(k, 0)] *= ph;
        u0[(k, 1)] *= ph;
    }
    Some([u0, projector_rows(kb[0], kb[1]), projector_rows(kc[0], kc[1])])
}

/// Linear cluster state on `nq` qubits: `|+⟩^{⊗nq}` followed by CZ on each
/// neighbouring pair.
pub fn linear_cluster_state(nq: usize) -> Result<CVector> {
    if nq == 0 || nq > 24 {
        return Err(Error::InvalidArgument(format!("cluster size {nq} out of range")));
    }
    let amp = (0.5f64).powf(nq as f64 / 2.0);
    Ok(CVector::from_fn(1 << nq, |x, _| {
        let edges = (0..nq - 1).filter(|&q| (x >> q) & 1 == 1 && (x >> (q + 1)) & 1 == 1).count();
        C64::new(if edges % 2 == 0 { amp } else { -amp }, 0.0)
    }))
}

/// Evidence that the `n`-photon state is not local-unitarily equivalent to
/// the linear cluster state on `n + 1` qubits: no two-qubit marginal of the
/// former is maximally mixed, while the cluster state has one. Two-qubit
/// marginal spectra are invariant under local unitaries and qubit
/// relabelling, so this rules out every identification.
#[derive(Clone, Debug, PartialEq)]
pub struct LueObstruction {
    pub n_photons: usize,
    /// Smallest distance of any pair marginal of `ψ⁽ⁿ⁾` from `1/4`.
    pub psi_min_distance: f64,
    /// Largest pair-marginal rank of `ψ⁽ⁿ⁾`.
    pub psi_max_pair_rank: usize,
    /// Cluster pair with a maximally mixed marginal.
    pub cluster_pair: Option<(usize, usize)>,
    pub cluster_pair_distance: f64,
}

impl LueObstruction {
    pub fn holds(&self, tol: f64) -> bool {
        self.psi_min_distance > tol && self.cluster_pair.is_some() && self.cluster_pair_distance <= tol
    }
}

pub fn lue_obstruction_check(n: usize) -> Result<LueObstruction> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("obstruction check needs n >= 4 (got {n})")));
    }
    let nq = n + 1;
    let psi = build_psi_n(n)?.erase_frequency()?.to_dense()?;
    let cluster = linear_cluster_state(nq)?;
    let mut psi_min_distance = f64::INFINITY;
    let mut psi_max_pair_rank = 0;
    let mut cluster_pair = None;
    let mut cluster_pair_distance = f64::INFINITY;
    for i in 0..nq {
        for j in i + 1..nq {
            let r = ReducedDensity { qubits: vec![i, j], matrix: reduced_density_dense(&psi, nq, &[i, j]) };
            psi_min_distance = psi_min_distance.min(r.distance_from_maximally_mixed());
            psi_max_pair_rank = psi_max_pair_rank.max(r.rank(1e-10));
            let c = ReducedDensity { qubits: vec![i, j], matrix: reduced_density_dense(&cluster, nq, &[i, j]) };
            let d = c.distance_from_maximally_mixed();
            if d < cluster_pair_distance {
                cluster_pair_distance = d;
                cluster_pair = Some((i, j));
            }
        }
    }
    Ok(LueObstruction { n_photons: n, psi_min_distance, psi_max_pair_rank, cluster_pair, cluster_pair_distance })
}
