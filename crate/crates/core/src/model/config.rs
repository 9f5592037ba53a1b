use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

/// Polarisation Jones vector in the circular basis `(σ₊, σ₋)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesVector(pub [C64; 2]);

impl JonesVector {
    /// `e_H = (1, 1)/√2`.
    pub const H: JonesVector = JonesVector([
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(FRAC_1_SQRT_2, 0.0),
    ]);
    /// `e_V = (1, −1)/√2`.
    pub const V: JonesVector = JonesVector([
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(-FRAC_1_SQRT_2, 0.0),
    ]);

    pub fn new(plus: C64, minus: C64) -> Self {
        JonesVector([plus, minus])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    /// `self† · other`.
    pub fn inner(&self, other: &JonesVector) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        JonesVector([self.0[0] / n, self.0[1] / n])
    }
}

impl Serialize for JonesVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.0[0].re, self.0[0].im], [self.0[1].re, self.0[1].im]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for JonesVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Named(String),
            Pairs([[f64; 2]; 2]),
        }
        match Repr::deserialize(d)? {
            Repr::Named(s) => match s.as_str() {
                "H" | "h" => Ok(JonesVector::H),
                "V" | "v" => Ok(JonesVector::V),
                other => Err(serde::de::Error::custom(format!(
                    "unknown polarisation '{other}' (expected H, V or [[re, im], [re, im]])"
                ))),
            },
            Repr::Pairs([[a, b], [c, d]]) => Ok(JonesVector([C64::new(a, b), C64::new(c, d)])),
        }
    }
}

/// All physical parameters and numerical controls for one simulation.
///
/// Rates are in ns⁻¹, times in ns. `b_ext` is the external Zeeman energy
/// `g_e μ_B B_ext` with ħ = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// QD–cavity coupling.
    pub g: f64,
    /// Cavity dissipation rate.
    pub kappa: f64,
    /// Peak drive amplitude.
    pub eta0: f64,
    /// Gaussian pulse width.
    pub t0: f64,
    /// Hole-to-electron Landé ratio g_h / g_e.
    pub gh_over_ge: f64,
    /// External Zeeman energy.
    pub b_ext: f64,
    /// Polar angle of the external field.
    pub theta: f64,
    /// Azimuthal angle of the external field.
    pub phi: f64,
    /// Maximum photon number kept per circular cavity mode.
    pub fock_cutoff: usize,
    pub input_polarization: JonesVector,
}

/// Named parameter sets for the low- and high-Q cavities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// κ = 1000 ns⁻¹ (Q ≈ 2000), η₀/κ = 10⁻³.
    LowQ,
    /// κ = 150 ns⁻¹ (Q ≈ 13000), η₀/κ = 10⁻².
    HighQ,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low-q" => Ok(Preset::LowQ),
            "high-q" => Ok(Preset::HighQ),
            other => Err(Error::Parse(format!("unknown preset '{other}'"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::LowQ => "low-q",
            Preset::HighQ => "high-q",
        })
    }
}

impl SystemConfig {
    /// Parameters of the named cavity. The pulse width is `8/Γ_cav` and the
    /// external field starts at `Γ_cav`; the field optimum is found numerically.
    pub fn preset(preset: Preset) -> Self {
        let g = 15.0;
        let (kappa, drive_ratio) = match preset {
            Preset::LowQ => (1000.0, 1e-3),
            Preset::HighQ => (150.0, 1e-2),
        };
        let gamma_cav = 4.0 * g * g / kappa;
        SystemConfig {
            g,
            kappa,
            eta0: drive_ratio * kappa,
            t0: 8.0 / gamma_cav,
            gh_over_ge: 0.2,
            b_ext: gamma_cav,
            theta: FRAC_PI_2,
            phi: 0.0,
            fock_cutoff: 2,
            input_polarization: JonesVector::H,
        }
    }

    /// Purcell-enhanced QD linewidth `Γ_cav = 4g²/κ`.
    pub fn gamma_cav(&self) -> f64 {
        4.0 * self.g * self.g / self.kappa
    }

    /// Composite Hilbert-space dimension `4 (N+1)²`.
    pub fn dim(&self) -> usize {
        4 * (self.fock_cutoff + 1).pow(2)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("eta0", self.eta0),
            ("t0", self.t0),
            ("gh_over_ge", self.gh_over_ge),
            ("b_ext", self.b_ext),
            ("theta", self.theta),
            ("phi", self.phi),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.g <= 0.0 {
            return bad("g must be > 0".into());
        }
        if self.kappa <= 0.0 {
            return bad("kappa must be > 0".into());
        }
        if self.t0 <= 0.0 {
            return bad("t0 must be > 0".into());
        }
        if self.eta0 < 0.0 {
            return bad("eta0 must be >= 0".into());
        }
        if self.b_ext < 0.0 {
            return bad("b_ext must be >= 0".into());
        }
        if self.fock_cutoff < 1 {
            return bad("fock_cutoff must be >= 1".into());
        }
        if !(0.0..=PI).contains(&self.theta) {
            return bad("theta must lie in [0, pi]".into());
        }
        let n = self.input_polarization.norm();
        if (n - 1.0).abs() > 1e-9 {
            return bad(format!("input_polarization must be normalised (norm {n})"));
        }
        Ok(())
    }

    /// The external field as a [`FieldVector`].
    pub fn external_field(&self) -> FieldVector {
        FieldVector::new(self.b_ext, self.theta, self.phi)
    }
}

/// Total magnetic field (external plus Overhauser sample) in energy units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    /// Total Zeeman energy `g_e μ_B |B|`.
    pub magnitude_b: f64,
    pub theta: f64,
    pub phi: f64,
}

impl FieldVector {
    /// Builds a field, folding negative magnitudes and out-of-range angles
    /// onto the canonical ranges `b ≥ 0`, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(magnitude_b: f64, theta: f64, phi: f64) -> Self {
        let [x, y, z] = spherical_to_cartesian(magnitude_b, theta, phi);
        if magnitude_b == 0.0 {
            return FieldVector { magnitude_b: 0.0, theta: theta.clamp(0.0, PI), phi: wrap_phi(phi) };
        }
        Self::from_cartesian([x, y, z])
    }

    pub fn from_cartesian(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r == 0.0 {
            return FieldVector { magnitude_b: 0.0, theta: 0.0, phi: 0.0 };
        }
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = wrap_phi(v[1].atan2(v[0]));
        FieldVector { magnitude_b: r, theta, phi }
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        spherical_to_cartesian(self.magnitude_b, self.theta, self.phi)
    }

    /// Unit vector of the field direction.
    pub fn direction(&self) -> [f64; 3] {
        spherical_to_cartesian(1.0, self.theta, self.phi)
    }
}

fn spherical_to_cartesian(r: f64, theta: f64, phi: f64) -> [f64; 3] {
    [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]
}

fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}
