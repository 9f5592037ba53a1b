//! Compressed-row operators and the column-major kernels used by the
//! master-equation right-hand side.

use crate::{CMatrix, C64};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &CMatrix) -> Self {
        assert!(m.is_square());
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    /// Two matrices on a shared sparsity pattern: returns the pattern with
    /// `a`'s values and `b`'s values aligned to it.
    pub fn union(a: &CMatrix, b: &CMatrix) -> (Csr, Vec<C64>) {
        let n = a.nrows();
        let mut row_ptr = vec![0];
        let (mut cols, mut va, mut vb) = (Vec::new(), Vec::new(), Vec::new());
        let zero = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != zero || b[(i, j)] != zero {
                    cols.push(j);
                    va.push(a[(i, j)]);
                    vb.push(b[(i, j)]);
                }
            }
            row_ptr.push(cols.len());
        }
        (Csr { n, row_ptr, cols, vals: va }, vb)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// `out += s · A X` for column-major `X`.
    pub fn mul_left_acc(&self, s: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let xc = &x[n * j..n * (j + 1)];
            let oc = &mut out[n * j..n * (j + 1)];
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k] * xc[self.cols[k]];
                }
                oc[i] += s * acc;
            }
        }
    }

    /// `out += s · X A†` for column-major `X`.
    ///
    /// Column `j` of `X A†` is `Σ_k conj(A_jk) X[:, k]`, so each entry of row
    /// `j` of `A` becomes one contiguous column axpy.
    pub fn mul_right_adjoint_acc(&self, s: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                let c = s * self.vals[k].conj();
                let src = self.cols[k];
                let (xc, oc) = (&x[n * src..n * (src + 1)], &mut out[n * j..n * (j + 1)]);
                for (o, xv) in oc.iter_mut().zip(xc) {
                    *o += c * xv;
                }
            }
        }
    }
}

/// An operator with at most one nonzero per row, such as a truncated
/// annihilation operator: `A_{i, src[i]} = val[i]`.
#[derive(Clone, Debug)]
pub struct Gather {
    pub src: Vec<Option<usize>>,
    pub val: Vec<C64>,
}

impl Gather {
    /// Returns `None` when some row has more than one nonzero.
    pub fn from_dense(m: &CMatrix) -> Option<Self> {
        let n = m.nrows();
        let mut src = vec![None; n];
        let mut val = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    if src[i].is_some() {
                        return None;
                    }
                    src[i] = Some(j);
                    val[i] = m[(i, j)];
                }
            }
        }
        Some(Gather { src, val })
    }

    /// `out += s · A X A†`.
    pub fn sandwich_acc(&self, s: f64, x: &[C64], out: &mut [C64]) {
        let n = self.src.len();
        for (j, sj) in self.src.iter().enumerate() {
            let Some(sj) = *sj else { continue };
            let cj = self.val[j].conj() * s;
            for (i, si) in self.src.iter().enumerate() {
                if let Some(si) = *si {
                    out[i + n * j] += self.val[i] * cj * x[si + n * sj];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OperatorSet;
    use proptest::prelude::*;

    fn random_matrix(n: usize, seed: u64, density: f64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            if rng.random::<f64>() < density {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn kernels_match_dense(seed in 0u64..1000, n in 1usize..12) {
            let a = random_matrix(n, seed, 0.3);
            let x = random_matrix(n, seed + 7, 1.0);
            let csr = Csr::from_dense(&a);
            prop_assert!(max_abs(&(csr.to_dense() - &a)) == 0.0);
            let s = C64::new(0.3, -1.2);

            let mut out = vec![C64::new(0.0, 0.0); n * n];
            csr.mul_left_acc(s, x.as_slice(), &mut out);
            let expect = &a * &x * s;
            prop_assert!(max_abs(&(CMatrix::from_column_slice(n, n, &out) - expect)) < 1e-12);

            let mut out = vec![C64::new(0.0, 0.0); n * n];
            csr.mul_right_adjoint_acc(s, x.as_slice(), &mut out);
            let expect = &x * a.adjoint() * s;
            prop_assert!(max_abs(&(CMatrix::from_column_slice(n, n, &out) - expect)) < 1e-12);
        }
    }

    #[test]
    fn gather_sandwich_matches_dense() {
        let ops = OperatorSet::new(2);
        let x = random_matrix(ops.dim, 3, 1.0);
        for a in [&ops.a_plus, &ops.a_minus] {
            let g = Gather::from_dense(a).unwrap();
            let mut out = vec![C64::new(0.0, 0.0); ops.dim * ops.dim];
            g.sandwich_acc(2.5, x.as_slice(), &mut out);
            let expect = a * &x * a.adjoint() * C64::new(2.5, 0.0);
            assert!(max_abs(&(CMatrix::from_column_slice(ops.dim, ops.dim, &out) - expect)) < 1e-12);
        }
        assert!(Gather::from_dense(&random_matrix(4, 1, 1.0)).is_none());
    }

    #[test]
    fn union_pattern_keeps_both() {
        let a = random_matrix(6, 11, 0.3);
        let b = random_matrix(6, 12, 0.3);
        let (pat, vb) = Csr::union(&a, &b);
        assert!(max_abs(&(pat.to_dense() - &a)) == 0.0);
        let other = Csr { vals: vb, ..pat };
        assert!(max_abs(&(other.to_dense() - &b)) == 0.0);
    }
}
