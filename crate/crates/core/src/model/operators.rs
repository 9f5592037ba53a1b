//! Composite QD ⊗ cavity Hilbert space.
//!
//! Basis ordering (fixed across the crate and in every serialised operator):
//! the QD index runs fastest over `{↑, ↓, ⇑, ⇓}`, then the σ₊ cavity Fock
//! number, then the σ₋ Fock number:
//!
//! ```text
//! index(q, n₊, n₋) = q + 4 · (n₊ + (N + 1) · n₋)
//! ```
//!
//! with `N` the per-mode Fock cutoff.

use nalgebra::Vector2;

use crate::{CMatrix, C64};

/// QD level labels in basis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QdLevel {
    /// Electron spin up (ground).
    Up = 0,
    /// Electron spin down (ground).
    Down = 1,
    /// Trion with heavy-hole J_z = +3/2.
    TrionUp = 2,
    /// Trion with heavy-hole J_z = −3/2.
    TrionDown = 3,
}

impl QdLevel {
    pub const ALL: [QdLevel; 4] = [QdLevel::Up, QdLevel::Down, QdLevel::TrionUp, QdLevel::TrionDown];
}

/// Circular cavity polarisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Circular {
    Plus,
    Minus,
}

/// A ground-manifold spin ket `c↑|↑⟩ + c↓|↓⟩`.
pub type SpinKet = Vector2<C64>;

/// All operators on the truncated composite space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub fock_cutoff: usize,
    pub dim: usize,
    /// Cavity annihilation operators `a₊`, `a₋`.
    pub a_plus: CMatrix,
    pub a_minus: CMatrix,
    /// `|↑⟩⟨⇑|` and `|↓⟩⟨⇓|`.
    pub sigma_up: CMatrix,
    pub sigma_down: CMatrix,
    /// Electron spin vector on the ground doublet (ħ = 1, eigenvalues ±½).
    pub electron_spin: [CMatrix; 3],
    /// Heavy-hole spin vector on the trion doublet; only `J_z = ±3/2` survives
    /// at first order in the hole Zeeman coupling, so x and y vanish.
    pub hole_spin: [CMatrix; 3],
    pub identity: CMatrix,
}

impl OperatorSet {
    pub fn new(fock_cutoff: usize) -> Self {
        assert!(fock_cutoff >= 1, "fock_cutoff must be >= 1");
        let m = fock_cutoff + 1;
        let dim = 4 * m * m;

        let qd = |op: &CMatrix| embed_qd(op, m);
        let one = C64::new(1.0, 0.0);
        let half = C64::new(0.5, 0.0);
        let i = C64::i();

        let mut sigma_up = CMatrix::zeros(4, 4);
        sigma_up[(0, 2)] = one;
        let mut sigma_down = CMatrix::zeros(4, 4);
        sigma_down[(1, 3)] = one;

        let mut sx = CMatrix::zeros(4, 4);
        sx[(0, 1)] = half;
        sx[(1, 0)] = half;
        let mut sy = CMatrix::zeros(4, 4);
        sy[(0, 1)] = -i * 0.5;
        sy[(1, 0)] = i * 0.5;
        let mut sz = CMatrix::zeros(4, 4);
        sz[(0, 0)] = half;
        sz[(1, 1)] = -half;
        let mut jz = CMatrix::zeros(4, 4);
        jz[(2, 2)] = C64::new(1.5, 0.0);
        jz[(3, 3)] = C64::new(-1.5, 0.0);

        let mut a_plus = CMatrix::zeros(dim, dim);
        let mut a_minus = CMatrix::zeros(dim, dim);
        for q in 0..4 {
            for np in 0..m {
                for nm in 0..m {
                    let col = index(q, np, nm, m);
                    if np > 0 {
                        a_plus[(index(q, np - 1, nm, m), col)] = C64::new((np as f64).sqrt(), 0.0);
                    }
                    if nm > 0 {
                        a_minus[(index(q, np, nm - 1, m), col)] = C64::new((nm as f64).sqrt(), 0.0);
                    }
                }
            }
        }

        OperatorSet {
            fock_cutoff,
            dim,
            a_plus,
            a_minus,
            sigma_up: qd(&sigma_up),
            sigma_down: qd(&sigma_down),
            electron_spin: [qd(&sx), qd(&sy), qd(&sz)],
            hole_spin: [CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim), qd(&jz)],
            identity: CMatrix::identity(dim, dim),
        }
    }

    pub fn index(&self, level: QdLevel, n_plus: usize, n_minus: usize) -> usize {
        index(level as usize, n_plus, n_minus, self.fock_cutoff + 1)
    }

    pub fn cavity(&self, pol: Circular) -> &CMatrix {
        match pol {
            Circular::Plus => &self.a_plus,
            Circular::Minus => &self.a_minus,
        }
    }

    /// `e† · A = e₊* a₊ + e₋* a₋` for a Jones vector `e`.
    pub fn projected_field(&self, e: &[C64; 2]) -> CMatrix {
        &self.a_plus * e[0].conj() + &self.a_minus * e[1].conj()
    }

    /// Total photon number `a₊†a₊ + a₋†a₋`.
    pub fn photon_number(&self) -> CMatrix {
        self.a_plus.adjoint() * &self.a_plus + self.a_minus.adjoint() * &self.a_minus
    }

    /// Lifts a ground-manifold operator `|u⟩⟨v|` to the composite space.
    pub fn ground_outer(&self, u: &SpinKet, v: &SpinKet) -> CMatrix {
        let mut op = CMatrix::zeros(4, 4);
        for r in 0..2 {
            for c in 0..2 {
                op[(r, c)] = u[r] * v[c].conj();
            }
        }
        embed_qd(&op, self.fock_cutoff + 1)
    }

    /// Projector onto the ground (electron) doublet.
    pub fn ground_projector(&self) -> CMatrix {
        let mut p = CMatrix::zeros(4, 4);
        p[(0, 0)] = C64::new(1.0, 0.0);
        p[(1, 1)] = C64::new(1.0, 0.0);
        embed_qd(&p, self.fock_cutoff + 1)
    }

    /// Projector onto the trion doublet.
    pub fn trion_projector(&self) -> CMatrix {
        &self.identity - self.ground_projector()
    }

    /// Pure-state density `|q, 0, 0⟩`-style composite ket from a ground spin ket
    /// and an empty cavity.
    pub fn ground_state_ket(&self, spin: &SpinKet) -> crate::CVector {
        let mut psi = crate::CVector::zeros(self.dim);
        psi[self.index(QdLevel::Up, 0, 0)] = spin[0];
        psi[self.index(QdLevel::Down, 0, 0)] = spin[1];
        psi
    }
}

fn index(q: usize, n_plus: usize, n_minus: usize, m: usize) -> usize {
    q + 4 * (n_plus + m * n_minus)
}

/// `op ⊗ 1_cavity` in the fixed basis ordering (QD index fastest).
fn embed_qd(op: &CMatrix, m: usize) -> CMatrix {
    let dim = 4 * m * m;
    let mut out = CMatrix::zeros(dim, dim);
    for block in 0..m * m {
        for r in 0..4 {
            for c in 0..4 {
                out[(4 * block + r, 4 * block + c)] = op[(r, c)];
            }
        }
    }
    out
}
