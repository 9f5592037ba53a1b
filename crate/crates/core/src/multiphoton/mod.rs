//! Exact term-sum spin–n-photon states.
//!
//! A term is `amplitude · |P₁…P_n; ν₁…ν_n⟩|φ_λ⟩` with polarisations
//! `H = 0`, `V = 1` and photon frequency offsets from `ω₀` stored as integers
//! in half-units of the Zeeman energy `b` (so a Raman photon at `ω₀ + b`
//! carries offset `+2`). Energies never appear as floating-point numbers.
//!
//! Qubit numbering: `0` is the spin (`φ₊ = 0`, `φ₋ = 1`), `1..=n` are the
//! photons in emission order. In dense vectors qubit `q` is bit `q` of the
//! index.

mod entanglement;

pub use entanglement::{
    ghz_equivalence_certificate, linear_cluster_state, lue_obstruction_check, reduced_density_dense, GhzCertificate,
    ReducedDensity,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::fidelity::Spin;
use crate::{CVector, C64};

/// Largest photon number accepted by [`build_psi_n`].
pub const MAX_PHOTONS: usize = 20;

/// Frequency offset of a Raman photon, `b`, in half-units.
pub const RAMAN_SHIFT: i8 = 2;

/// Identity of one term; amplitudes of equal keys are merged.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub spin: Spin,
    /// Photon `j` (1-based) is bit `j − 1`; set bits are `V`.
    pub bits: u32,
    /// Offsets in half-units of `b`, one per photon; empty once erased.
    pub freq: Vec<i8>,
}

impl TermKey {
    /// Photon frequency offset summed over photons (half-units of `b`).
    pub fn photon_offset(&self) -> i32 {
        self.freq.iter().map(|&f| f as i32).sum()
    }

    /// Photon offsets plus the spin's Zeeman energy `±b/2` (half-units).
    pub fn energy(&self) -> i32 {
        self.photon_offset()
            + match self.spin {
                Spin::Plus => 1,
                Spin::Minus => -1,
            }
    }

    /// Bit of qubit `q` (0 = spin).
    pub fn qubit(&self, q: usize) -> u8 {
        if q == 0 {
            self.spin.bit()
        } else {
            ((self.bits >> (q - 1)) & 1) as u8
        }
    }

    fn with_qubit(&self, q: usize, v: u8) -> TermKey {
        let mut k = self.clone();
        if q == 0 {
            k.spin = Spin::from_bit(v);
        } else {
            k.bits = (k.bits & !(1 << (q - 1))) | ((v as u32) << (q - 1));
        }
        k
    }

    /// Index in the dense qubit vector.
    pub fn dense_index(&self) -> usize {
        self.spin.bit() as usize | ((self.bits as usize) << 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicPhotonState {
    n: usize,
    erased: bool,
    terms: BTreeMap<TermKey, C64>,
}

const ZERO_AMP2: f64 = 1e-30;

impl SymbolicPhotonState {
    /// Spin in `φ₊`, no photons.
    pub fn initial() -> Self {
        Self::spin_only(Spin::Plus)
    }

    pub fn spin_only(spin: Spin) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(TermKey { spin, bits: 0, freq: Vec::new() }, C64::new(1.0, 0.0));
        SymbolicPhotonState { n: 0, erased: false, terms }
    }

    /// Builds a state from explicit terms, merging duplicate keys.
    pub fn from_terms(n: usize, erased: bool, terms: impl IntoIterator<Item = (TermKey, C64)>) -> Result<Self> {
        if n > 31 {
            return Err(Error::InvalidArgument(format!("{n} photons exceed the 31-bit term key")));
        }
        let mut map = BTreeMap::new();
        for (k, a) in terms {
            if (k.bits as u64) >> n != 0 {
                return Err(Error::InvalidArgument(format!("bitstring {:b} longer than {n} photons", k.bits)));
            }
            let want = if erased { 0 } else { n };
            if k.freq.len() != want {
                return Err(Error::InvalidArgument(format!(
                    "term has {} frequency labels, expected {want}",
                    k.freq.len()
                )));
            }
            *map.entry(k).or_insert(C64::new(0.0, 0.0)) += a;
        }
        let mut s = SymbolicPhotonState { n, erased, terms: map };
        s.prune();
        Ok(s)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm_sqr() > ZERO_AMP2);
    }

    pub fn n_photons(&self) -> usize {
        self.n
    }

    pub fn is_erased(&self) -> bool {
        self.erased
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &C64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, key: &TermKey) -> C64 {
        self.terms.get(key).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, matching keys exactly.
    pub fn inner(&self, other: &Self) -> C64 {
        self.terms.iter().map(|(k, a)| a.conj() * other.amplitude(k)).sum()
    }

    /// Total energy (half-units of `b`) of every term, with summed weight.
    pub fn energy_classes(&self) -> Result<BTreeMap<i32, f64>> {
        self.require_labels()?;
        let mut m = BTreeMap::new();
        for (k, a) in &self.terms {
            *m.entry(k.energy()).or_insert(0.0) += a.norm_sqr();
        }
        Ok(m)
    }

    /// All terms share one total energy, so free evolution is a global phase.
    pub fn is_energy_protected(&self) -> Result<bool> {
        Ok(self.energy_classes()?.len() <= 1)
    }

    /// `φ₊` terms carry no net photon offset and all `φ₋` terms carry one
    /// common offset; returns that offset (half-units) when the check passes.
    pub fn spin_offset_classes(&self) -> Result<Option<Option<i32>>> {
        self.require_labels()?;
        let mut minus = None;
        for k in self.terms.keys() {
            match k.spin {
                Spin::Plus if k.photon_offset() != 0 => return Ok(None),
                Spin::Plus => {}
                Spin::Minus => match minus {
                    None => minus = Some(k.photon_offset()),
                    Some(m) if m != k.photon_offset() => return Ok(None),
                    Some(_) => {}
                },
            }
        }
        Ok(Some(minus))
    }

    fn require_labels(&self) -> Result<()> {
        if self.erased {
            return Err(Error::InvalidArgument("operation needs frequency labels; state was erased".into()));
        }
        Ok(())
    }

    fn require_erased(&self) -> Result<()> {
        if !self.erased && self.terms.keys().any(|k| k.freq.iter().any(|&f| f != 0)) {
            return Err(Error::FrequencyLabelsPresent);
        }
        Ok(())
    }

    /// One more `|H, ω₀⟩` photon scattered off the QD:
    /// `|φ₊⟩ → (|H,ω₀⟩|φ₊⟩ − i|V,ω₀+b⟩|φ₋⟩)/√2`,
    /// `|φ₋⟩ → (|H,ω₀⟩|φ₋⟩ + i|V,ω₀−b⟩|φ₊⟩)/√2`.
    pub fn apply_scattering_map(&self) -> Result<Self> {
        if self.erased {
            return Err(Error::AlreadyErased);
        }
        if self.n >= 31 {
            return Err(Error::InvalidArgument("too many photons for the term key".into()));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let j = self.n;
        let mut out: BTreeMap<TermKey, C64> = BTreeMap::new();
        for (k, &a) in &self.terms {
            let mut stay = k.clone();
            stay.freq.push(0);
            let mut flip = k.clone();
            flip.bits |= 1 << j;
            let (flip_amp, flip_spin, shift) = match k.spin {
                Spin::Plus => (C64::new(0.0, -s), Spin::Minus, RAMAN_SHIFT),
                Spin::Minus => (C64::new(0.0, s), Spin::Plus, -RAMAN_SHIFT),
            };
            flip.spin = flip_spin;
            flip.freq.push(shift);
            *out.entry(stay).or_insert(C64::new(0.0, 0.0)) += a * s;
            *out.entry(flip).or_insert(C64::new(0.0, 0.0)) += a * flip_amp;
        }
        let mut st = SymbolicPhotonState { n: self.n + 1, erased: false, terms: out };
        st.prune();
        Ok(st)
    }

    /// Drops the frequency labels and merges terms. Fails if merging cancels
    /// amplitude, i.e. the labels carried which-path information that
    /// erasure cannot remove coherently.
    pub fn erase_frequency(&self) -> Result<Self> {
        if self.erased {
            return Ok(self.clone());
        }
        let before = self.norm();
        let mut out: BTreeMap<TermKey, C64> = BTreeMap::new();
        for (k, &a) in &self.terms {
            let key = TermKey { spin: k.spin, bits: k.bits, freq: Vec::new() };
            *out.entry(key).or_insert(C64::new(0.0, 0.0)) += a;
        }
        let mut st = SymbolicPhotonState { n: self.n, erased: true, terms: out };
        st.prune();
        let after = st.norm();
        if (after - before).abs() > 1e-12 {
            return Err(Error::LossyErasure { before, after });
        }
        Ok(st)
    }

    /// Projects the spin onto `outcome`; returns the renormalised state and
    /// its Born probability.
    pub fn project_spin(&self, outcome: Spin) -> Result<(Self, f64)> {
        let terms: BTreeMap<TermKey, C64> =
            self.terms.iter().filter(|(k, _)| k.spin == outcome).map(|(k, a)| (k.clone(), *a)).collect();
        self.renormalized(terms)
    }

    fn renormalized(&self, terms: BTreeMap<TermKey, C64>) -> Result<(Self, f64)> {
        let total = self.norm().powi(2);
        let p: f64 = terms.values().map(|a| a.norm_sqr()).sum();
        if !(p > ZERO_AMP2) {
            return Err(Error::ZeroProbability);
        }
        let scale = 1.0 / p.sqrt();
        let terms = terms.into_iter().map(|(k, a)| (k, a * scale)).collect();
        Ok((SymbolicPhotonState { n: self.n, erased: self.erased, terms }, p / total))
    }

    /// Projective measurement of qubits `indices` (0 = spin) in the
    /// computational basis with the given outcome bits.
    pub fn measure_computational(&self, indices: &[usize], outcomes: &[u8]) -> Result<(Self, f64)> {
        self.require_erased()?;
        if indices.len() != outcomes.len() {
            return Err(Error::InvalidArgument("one outcome per measured qubit required".into()));
        }
        for (&q, &o) in indices.iter().zip(outcomes) {
            if q > self.n || o > 1 {
                return Err(Error::InvalidArgument(format!("bad qubit {q} / outcome {o}")));
            }
        }
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| indices.iter().zip(outcomes).all(|(&q, &o)| k.qubit(q) == o))
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        self.renormalized(terms)
    }

    /// Measures photons `photons` (1-based) and the spin in the computational
    /// basis. `outcomes` lists the photon results followed by the spin result.
    pub fn measure_photons_computational(&self, photons: &[usize], outcomes: &[u8]) -> Result<(Self, f64)> {
        if photons.iter().any(|&p| p == 0 || p > self.n) {
            return Err(Error::InvalidArgument(format!("photon indices must lie in 1..={}", self.n)));
        }
        let mut idx = photons.to_vec();
        idx.push(0);
        self.measure_computational(&idx, outcomes)
    }

    /// Applies a 2×2 unitary to qubit `q` (0 = spin).
    pub fn apply_single_qubit(&self, q: usize, u: &Matrix2<C64>) -> Result<Self> {
        self.require_erased()?;
        if q > self.n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        let mut out: BTreeMap<TermKey, C64> = BTreeMap::new();
        for (k, &a) in &self.terms {
            let b = k.qubit(q) as usize;
            for v in 0..2u8 {
                let c = u[(v as usize, b)];
                if c != C64::new(0.0, 0.0) {
                    *out.entry(k.with_qubit(q, v)).or_insert(C64::new(0.0, 0.0)) += c * a;
                }
            }
        }
        let mut st = SymbolicPhotonState { n: self.n, erased: self.erased, terms: out };
        st.prune();
        Ok(st)
    }

    /// `(|0⟩⟨0| + |1⟩⟨0| + |0⟩⟨1| − |1⟩⟨1|)/√2` on photon `photon` (1-based).
    pub fn hadamard(&self, photon: usize) -> Result<Self> {
        if photon == 0 || photon > self.n {
            return Err(Error::InvalidArgument(format!("photon index must lie in 1..={}", self.n)));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Matrix2::new(C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0));
        self.apply_single_qubit(photon, &h)
    }

    /// Free evolution for time `t` under total Zeeman energy `b`: each term
    /// picks up `e^{−iEt}` with `E` its total energy.
    pub fn free_evolution(&self, b: f64, t: f64) -> Result<Self> {
        self.require_labels()?;
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.clone(), a * C64::from_polar(1.0, -(k.energy() as f64) * 0.5 * b * t)))
            .collect();
        Ok(SymbolicPhotonState { n: self.n, erased: false, terms })
    }

    /// `|⟨ψ|ψ(t)⟩|²/‖ψ‖⁴` after free evolution, evaluated from the energy
    /// classes with phases relative to the lowest class. A single class gives
    /// exactly one.
    pub fn evolution_fidelity(&self, b: f64, t: f64) -> Result<f64> {
        let classes = self.energy_classes()?;
        let Some((&e0, _)) = classes.iter().next() else {
            return Err(Error::ZeroProbability);
        };
        let mut acc = C64::new(0.0, 0.0);
        let mut total = 0.0;
        for (&e, &w) in &classes {
            total += w;
            acc += if e == e0 { C64::new(w, 0.0) } else { C64::from_polar(w, -((e - e0) as f64) * 0.5 * b * t) };
        }
        Ok(acc.norm_sqr() / (total * total))
    }

    /// Dense vector over the `n + 1` qubits; requires erased labels.
    pub fn to_dense(&self) -> Result<CVector> {
        self.require_erased()?;
        if self.n > MAX_PHOTONS {
            return Err(Error::InvalidArgument(format!("dense vector for {} photons is too large", self.n)));
        }
        let mut v = CVector::zeros(1 << (self.n + 1));
        for (k, &a) in &self.terms {
            v[k.dense_index()] += a;
        }
        Ok(v)
    }

    /// Reduced density of qubits `qubits` (0 = spin). The first listed qubit
    /// is the most significant in the returned matrix.
    pub fn reduced_density(&self, qubits: &[usize]) -> Result<ReducedDensity> {
        self.require_erased()?;
        let v = self.to_dense()?;
        for (i, &q) in qubits.iter().enumerate() {
            if q > self.n || qubits[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!("qubit list {qubits:?} invalid for {} photons", self.n)));
            }
        }
        let norm2 = v.norm_squared();
        Ok(ReducedDensity { qubits: qubits.to_vec(), matrix: reduced_density_dense(&v, self.n + 1, qubits) / C64::new(norm2, 0.0) })
    }

    /// Amplitudes of the kept qubits when every other qubit is in one fixed
    /// computational state (e.g. after measuring it).
    pub fn pure_amplitudes(&self, qubits: &[usize]) -> Result<CVector> {
        self.require_erased()?;
        let mut rest: Option<Vec<u8>> = None;
        let mut out = CVector::zeros(1 << qubits.len());
        let others: Vec<usize> = (0..=self.n).filter(|q| !qubits.contains(q)).collect();
        for (k, &a) in &self.terms {
            let r: Vec<u8> = others.iter().map(|&q| k.qubit(q)).collect();
            match &rest {
                None => rest = Some(r),
                Some(r0) if *r0 != r => {
                    return Err(Error::InvalidArgument("remaining qubits are not in a fixed product state".into()))
                }
                _ => {}
            }
            let idx = qubits.iter().fold(0usize, |acc, &q| (acc << 1) | k.qubit(q) as usize);
            out[idx] += a;
        }
        Ok(out)
    }

    /// One term per line: `spin bitstring offsets re im`. The bitstring lists
    /// photon 1 first (`.` for none); offsets are in units of `b`,
    /// comma-separated (`-` once erased).
    pub fn to_text(&self) -> String {
        let mut s = format!("# photons {} erased {}\n", self.n, self.erased);
        for (k, a) in &self.terms {
            let bits: String = if self.n == 0 {
                ".".into()
            } else {
                (0..self.n).map(|j| if (k.bits >> j) & 1 == 1 { 'V' } else { 'H' }).collect()
            };
            let freq = if self.erased || self.n == 0 {
                "-".to_string()
            } else {
                k.freq.iter().map(|&f| offset_text(f)).collect::<Vec<_>>().join(",")
            };
            let _ = writeln!(s, "{} {} {} {:e} {:e}", k.spin.label(), bits, freq, a.re, a.im);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty state text".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (n, erased) = match h.as_slice() {
            ["#", "photons", n, "erased", e] => (
                n.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?,
                e.parse::<bool>().map_err(|e| Error::Parse(e.to_string()))?,
            ),
            _ => return Err(Error::Parse(format!("bad header '{header}'"))),
        };
        let mut terms = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let [spin, bits, freq, re, im] = f.as_slice() else {
                return Err(Error::Parse(format!("bad term line '{line}'")));
            };
            let spin = match *spin {
                "+" => Spin::Plus,
                "-" => Spin::Minus,
                _ => return Err(Error::Parse(format!("bad spin '{spin}'"))),
            };
            let mut b = 0u32;
            if *bits != "." {
                if bits.len() != n {
                    return Err(Error::Parse(format!("bitstring '{bits}' has wrong length")));
                }
                for (j, c) in bits.chars().enumerate() {
                    match c {
                        'H' => {}
                        'V' => b |= 1 << j,
                        _ => return Err(Error::Parse(format!("bad polarisation '{c}'"))),
                    }
                }
            }
            let freq = if *freq == "-" {
                Vec::new()
            } else {
                freq.split(',').map(parse_offset).collect::<Result<_>>()?
            };
            let p = |x: &str| x.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            terms.push((TermKey { spin, bits: b, freq }, C64::new(p(re)?, p(im)?)));
        }
        Self::from_terms(n, erased, terms)
    }
}

fn offset_text(half: i8) -> String {
    if half % 2 == 0 {
        (half / 2).to_string()
    } else {
        format!("{}", half as f64 / 2.0)
    }
}

fn parse_offset(x: &str) -> Result<i8> {
    let v: f64 = x.parse().map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
    let h = 2.0 * v;
    if h.fract() != 0.0 || h.abs() > i8::MAX as f64 {
        return Err(Error::Parse(format!("frequency offset '{x}' is not a multiple of b/2")));
    }
    Ok(h as i8)
}

/// `|ψ⁽ⁿ⁾⟩`: `n` scattering events starting from `|φ₊⟩`.
pub fn build_psi_n(n: usize) -> Result<SymbolicPhotonState> {
    if n == 0 || n > MAX_PHOTONS {
        return Err(Error::InvalidArgument(format!("photon number must lie in 1..={MAX_PHOTONS} (got {n})")));
    }
    let mut s = SymbolicPhotonState::initial();
    for _ in 0..n {
        s = s.apply_scattering_map()?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn key(spin: Spin, bits: &str, freq: &[i8]) -> TermKey {
        let b = bits.chars().enumerate().fold(0u32, |acc, (j, c)| acc | (((c == 'V') as u32) << j));
        TermKey { spin, bits: b, freq: freq.to_vec() }
    }

    #[test]
    fn one_photon_state() {
        let s = build_psi_n(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.len(), 2);
        assert_eq!(s.amplitude(&key(Spin::Plus, "H", &[0])), C64::new(r, 0.0));
        assert_eq!(s.amplitude(&key(Spin::Minus, "V", &[2])), C64::new(0.0, -r));
    }

    #[test]
    fn two_photon_state() {
        let s = build_psi_n(2).unwrap();
        assert_eq!(s.len(), 4);
        let expect = [
            (key(Spin::Plus, "HH", &[0, 0]), C64::new(0.5, 0.0)),
            (key(Spin::Minus, "HV", &[0, 2]), C64::new(0.0, -0.5)),
            (key(Spin::Minus, "VH", &[2, 0]), C64::new(0.0, -0.5)),
            (key(Spin::Plus, "VV", &[2, -2]), C64::new(0.5, 0.0)),
        ];
        for (k, a) in expect {
            assert_relative_eq!((s.amplitude(&k) - a).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn guard_and_erased_scattering() {
        assert!(build_psi_n(0).is_err());
        assert!(build_psi_n(MAX_PHOTONS + 1).is_err());
        let e = build_psi_n(2).unwrap().erase_frequency().unwrap();
        assert!(matches!(e.apply_scattering_map(), Err(Error::AlreadyErased)));
    }

    #[test]
    fn lossy_erasure_detected() {
        // Same polarisation/spin, opposite amplitudes, different frequencies.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = SymbolicPhotonState::from_terms(
            1,
            false,
            [(key(Spin::Plus, "H", &[2]), C64::new(r, 0.0)), (key(Spin::Plus, "H", &[-2]), C64::new(-r, 0.0))],
        )
        .unwrap();
        assert!(matches!(s.erase_frequency(), Err(Error::LossyErasure { .. })));
    }

    #[test]
    fn spin_projection() {
        let s = build_psi_n(2).unwrap();
        let (p, prob) = s.project_spin(Spin::Plus).unwrap();
        assert_relative_eq!(prob, 0.5, epsilon = 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!((p.amplitude(&key(Spin::Plus, "HH", &[0, 0])) - r).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((p.amplitude(&key(Spin::Plus, "VV", &[2, -2])) - r).norm(), 0.0, epsilon = 1e-15);
        let (m, prob) = build_psi_n(1).unwrap().project_spin(Spin::Minus).unwrap();
        assert_relative_eq!(prob, 0.5, epsilon = 1e-15);
        assert_relative_eq!((m.amplitude(&key(Spin::Minus, "V", &[2])) - C64::new(0.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
        let only_plus = SymbolicPhotonState::initial();
        assert!(matches!(only_plus.project_spin(Spin::Minus), Err(Error::ZeroProbability)));
    }

    #[test]
    fn energy_classes_of_protocol_states() {
        for n in 1..=8 {
            let s = build_psi_n(n).unwrap();
            assert!(s.is_energy_protected().unwrap());
            let minus = s.spin_offset_classes().unwrap().expect("invariant");
            assert_eq!(minus, Some(RAMAN_SHIFT as i32));
        }
    }

    #[test]
    fn hadamard_is_involutive() {
        let s = build_psi_n(3).unwrap().erase_frequency().unwrap();
        let h = s.hadamard(2).unwrap();
        assert_relative_eq!(h.norm(), 1.0, epsilon = 1e-14);
        let back = h.hadamard(2).unwrap();
        assert_relative_eq!((back.inner(&s)).norm(), 1.0, epsilon = 1e-14);
        assert!(s.hadamard(0).is_err());
        assert!(s.hadamard(4).is_err());
        let single = SymbolicPhotonState::from_terms(1, true, [(key(Spin::Plus, "H", &[]), C64::new(1.0, 0.0))]).unwrap();
        let hs = single.hadamard(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!((hs.amplitude(&key(Spin::Plus, "H", &[])) - r).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((hs.amplitude(&key(Spin::Plus, "V", &[])) - r).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn hadamard_needs_erasure() {
        assert!(matches!(build_psi_n(2).unwrap().hadamard(1), Err(Error::FrequencyLabelsPresent)));
    }

    #[test]
    fn full_measurement_is_born_rule() {
        let s = build_psi_n(3).unwrap().erase_frequency().unwrap();
        for (k, a) in s.terms() {
            let outcomes: Vec<u8> = (1..=3).map(|q| k.qubit(q)).chain([k.qubit(0)]).collect();
            let (_, p) = s.measure_photons_computational(&[1, 2, 3], &outcomes).unwrap();
            assert_relative_eq!(p, a.norm_sqr(), epsilon = 1e-15);
        }
    }

    #[test]
    fn text_round_trip() {
        for s in [build_psi_n(3).unwrap(), build_psi_n(4).unwrap().erase_frequency().unwrap(), SymbolicPhotonState::initial()]
        {
            let t = s.to_text();
            assert_eq!(SymbolicPhotonState::from_text(&t).unwrap(), s);
        }
        assert!(SymbolicPhotonState::from_text("# photons 1 erased false\n+ HX 0 1 0\n").is_err());
        assert!(SymbolicPhotonState::from_text("# photons 1 erased false\n+ H 0.3 1 0\n").is_err());
        let t = build_psi_n(2).unwrap().to_text();
        assert!(t.contains("+ VV 1,-1 "), "{t}");
        let half = SymbolicPhotonState::from_terms(1, false, [(key(Spin::Plus, "V", &[-1]), C64::new(1.0, 0.0))]).unwrap();
        assert!(half.to_text().contains(" -0.5 "));
        assert_eq!(SymbolicPhotonState::from_text(&half.to_text()).unwrap(), half);
    }

    #[test]
    fn evolution_fidelity_single_class_is_exactly_one() {
        let (p, _) = build_psi_n(5).unwrap().project_spin(Spin::Minus).unwrap();
        for t in [0.0, 0.3, 7.1, 1e4] {
            assert_eq!(p.evolution_fidelity(6.0, t).unwrap(), 1.0);
        }
    }
}
