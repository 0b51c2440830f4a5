//! Shared parameter types and the per-atom response function.
//!
//! Frequencies are dimensionless multiples of a reference frequency chosen per
//! experiment. Positions and lattice constants are in units of the wavelength
//! λ carried by [`WaveguideParams`]. Coupling widths follow the convention
//! Γ = |V|²/2v, under which a chiral atom has hop factor
//! (D − iΓδ₃)/(D + iΓδ₃).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Denominators below this modulus are treated as exact zeros.
pub const SINGULAR_FLOOR: f64 = 1e-30;

/// Parameters of one driven Λ-type emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    /// Excited-state |2⟩ frequency.
    pub omega2: f64,
    /// Effective metastable-state |3⟩ frequency in the rotating frame.
    pub omega3: f64,
    /// Rabi frequency Ω of the 2↔3 drive.
    pub rabi: f64,
    /// Non-waveguide decay width γ₂ of |2⟩.
    pub gamma2: f64,
    /// Coupling width to right-moving modes.
    pub gamma_r: f64,
    /// Coupling width to left-moving modes; zero for a chiral waveguide.
    pub gamma_l: f64,
    /// Coordinate along the waveguide, in units of λ.
    pub position: f64,
}

impl Default for AtomParams {
    fn default() -> Self {
        Self {
            omega2: 1.0,
            omega3: 1.0,
            rabi: 0.0,
            gamma2: 0.0,
            gamma_r: 0.0,
            gamma_l: 0.0,
            position: 0.0,
        }
    }
}

impl AtomParams {
    /// Atom with ω₃ = ω₂ and the given drive and widths, placed at the origin.
    pub fn new(omega2: f64, rabi: f64, gamma2: f64, gamma_r: f64, gamma_l: f64) -> Self {
        Self {
            omega2,
            omega3: omega2,
            rabi,
            gamma2,
            gamma_r,
            gamma_l,
            position: 0.0,
        }
    }

    pub fn at(mut self, position: f64) -> Self {
        self.position = position;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega2", self.omega2),
            ("omega3", self.omega3),
            ("rabi", self.rabi),
            ("gamma2", self.gamma2),
            ("gamma_r", self.gamma_r),
            ("gamma_l", self.gamma_l),
            ("position", self.position),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        for (name, value) in &fields[2..6] {
            if *value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative, got {value}"
                )));
            }
        }
        if self.omega2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega2 must be positive, got {}",
                self.omega2
            )));
        }
        Ok(())
    }

    pub fn is_chiral(&self) -> bool {
        self.gamma_l == 0.0
    }
}

/// How width parameters were quoted on input.
///
/// `Linewidth` is the convention of the closed-form single-atom and dispersion
/// formulas, where every coupling width is four times the coupling-convention
/// value and the excited-state width twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthConvention {
    #[default]
    Coupling,
    Linewidth,
}

/// Factor by which coupling widths are larger in the linewidth convention.
pub const LINEWIDTH_COUPLING_SCALE: f64 = 4.0;
/// Factor by which γ₂ is larger in the linewidth convention.
pub const LINEWIDTH_DECAY_SCALE: f64 = 2.0;

impl std::str::FromStr for WidthConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupling" => Ok(Self::Coupling),
            "linewidth" => Ok(Self::Linewidth),
            other => Err(Error::InvalidParameter(format!(
                "unknown width convention '{other}' (expected coupling or linewidth)"
            ))),
        }
    }
}

impl WidthConvention {
    /// Converts widths quoted in `self` into the coupling convention.
    pub fn to_coupling(self, atom: AtomParams) -> AtomParams {
        match self {
            Self::Coupling => atom,
            Self::Linewidth => AtomParams {
                gamma2: atom.gamma2 / LINEWIDTH_DECAY_SCALE,
                gamma_r: atom.gamma_r / LINEWIDTH_COUPLING_SCALE,
                gamma_l: atom.gamma_l / LINEWIDTH_COUPLING_SCALE,
                ..atom
            },
        }
    }
}

/// Linear-dispersion waveguide with independent right and left group velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideParams {
    pub v_r: f64,
    /// Zero selects the chiral solver.
    pub v_l: f64,
    /// Linearization frequency ω₀.
    pub omega0: f64,
    /// λ in natural length units (v/frequency); positions are multiplied by it.
    pub wavelength: f64,
}

impl Default for WaveguideParams {
    fn default() -> Self {
        Self::symmetric()
    }
}

impl WaveguideParams {
    pub fn symmetric() -> Self {
        Self {
            v_r: 1.0,
            v_l: 1.0,
            omega0: 0.0,
            wavelength: std::f64::consts::TAU,
        }
    }

    pub fn chiral() -> Self {
        Self {
            v_l: 0.0,
            ..Self::symmetric()
        }
    }

    pub fn with_v_l(mut self, v_l: f64) -> Self {
        self.v_l = v_l;
        self
    }

    /// Sets λ = 2π v_R / ω_ref.
    pub fn with_reference_frequency(mut self, omega_ref: f64) -> Self {
        self.wavelength = std::f64::consts::TAU * self.v_r / omega_ref;
        self
    }

    pub fn is_chiral(&self) -> bool {
        self.v_l == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_r.is_finite() && self.v_r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "v_r must be positive, got {}",
                self.v_r
            )));
        }
        if !(self.v_l.is_finite() && self.v_l >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "v_l must be nonnegative, got {}",
                self.v_l
            )));
        }
        if !self.omega0.is_finite() {
            return Err(Error::InvalidParameter("omega0 must be finite".into()));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::InvalidParameter(
                "wavelength must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn q_r(&self, omega: f64) -> f64 {
        (omega - self.omega0) / self.v_r
    }

    pub fn q_l(&self, omega: f64) -> f64 {
        (omega - self.omega0) / self.v_l
    }

    /// Phase (q_R + q_L)·d/2 accumulated over a separation `d` given in units of λ.
    pub fn half_phase(&self, omega: f64, d: f64) -> f64 {
        0.5 * (self.q_r(omega) + self.q_l(omega)) * d * self.wavelength
    }
}

/// Ordered chain of emitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub atoms: Vec<AtomParams>,
    /// Mean spacing L in units of λ.
    pub lattice_constant: f64,
}

impl ChainConfig {
    /// `n` copies of `template` at x_j = j·L, j = 1..=n.
    pub fn periodic(template: AtomParams, n: usize, lattice_constant: f64) -> Self {
        let atoms = (1..=n)
            .map(|j| template.at(j as f64 * lattice_constant))
            .collect();
        Self {
            atoms,
            lattice_constant,
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Virtual coordinate x₀ one lattice step before the first atom.
    pub fn origin(&self) -> f64 {
        self.atoms
            .first()
            .map_or(0.0, |a| a.position - self.lattice_constant)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lattice_constant.is_finite() && self.lattice_constant > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lattice_constant must be positive, got {}",
                self.lattice_constant
            )));
        }
        for atom in &self.atoms {
            atom.validate()?;
        }
        for pair in self.atoms.windows(2) {
            if pair[0].position >= pair[1].position {
                return Err(Error::InvalidParameter(format!(
                    "positions must be strictly increasing ({} >= {})",
                    pair[0].position, pair[1].position
                )));
            }
        }
        Ok(())
    }

    /// Concatenation of `self` followed by `other`.
    pub fn join(&self, other: &ChainConfig) -> ChainConfig {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        ChainConfig {
            atoms,
            lattice_constant: self.lattice_constant,
        }
    }
}

/// Is `den` indistinguishable from zero given the magnitude of the terms it came from?
pub(crate) fn is_degenerate(den: Complex64, scale: f64) -> bool {
    let m = den.norm();
    m < SINGULAR_FLOOR || m <= 64.0 * f64::EPSILON * scale
}

/// Atomic response ϖ(ω) = (ω−ω₃)/[(ω−ω₂+iγ₂)(ω−ω₃) − (Ω/2)²].
///
/// With Ω = 0 the common factor (ω−ω₃) cancels and the two-level response
/// 1/(ω−ω₂+iγ₂) is returned.
pub fn varpi(omega: f64, atom: &AtomParams) -> Result<Complex64> {
    let d2 = Complex64::new(omega - atom.omega2, atom.gamma2);
    if atom.rabi == 0.0 {
        if is_degenerate(d2, omega.abs().max(atom.omega2.abs())) {
            return Err(Error::DegeneratePole { omega });
        }
        return Ok(d2.inv());
    }
    let d3 = omega - atom.omega3;
    let half_rabi_sq = 0.25 * atom.rabi * atom.rabi;
    let den = d2 * d3 - half_rabi_sq;
    if is_degenerate(den, d2.norm() * d3.abs() + half_rabi_sq) {
        return Err(Error::DegeneratePole { omega });
    }
    Ok(d3 / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(omega2: f64, omega3: f64, rabi: f64, gamma2: f64) -> AtomParams {
        AtomParams {
            omega2,
            omega3,
            rabi,
            gamma2,
            ..AtomParams::default()
        }
    }

    #[test]
    fn two_photon_resonance_gives_zero() {
        for gamma2 in [0.0, 0.1, 2.0] {
            let w = varpi(1.0, &atom(1.0, 1.0, 0.3, gamma2)).unwrap();
            assert_eq!(w, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn two_level_limit() {
        let w = varpi(1.3, &atom(1.0, 0.7, 0.0, 0.0)).unwrap();
        assert!((w - Complex64::new(1.0 / 0.3, 0.0)).norm() < 1e-12);
        // ω = ω₃ with Ω = 0 would be 0/0 in the three-level form
        let w = varpi(0.7, &atom(1.0, 0.7, 0.0, 0.0)).unwrap();
        assert!((w - Complex64::new(-1.0 / 0.3, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dressed_pole_is_reported() {
        let err = varpi(1.1, &atom(1.0, 1.0, 0.2, 0.0)).unwrap_err();
        assert_eq!(err, Error::DegeneratePole { omega: 1.1 });
        assert!(varpi(0.9, &atom(1.0, 1.0, 0.2, 0.0)).is_err());
        assert!(varpi(1.0, &atom(1.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn finite_with_small_decay() {
        let a = atom(1.0, 1.0, 0.2, 1e-6);
        for k in 0..=20_000 {
            let omega = 0.5 + k as f64 * 5e-5;
            assert!(varpi(omega, &a).is_ok(), "pole at {omega}");
        }
        // exactly on the dressed states too
        assert!(varpi(1.1, &a).is_ok());
        assert!(varpi(0.9, &a).is_ok());
    }

    #[test]
    fn lossless_response_is_real() {
        let a = atom(1.0, 0.95, 0.25, 0.0);
        for omega in [0.3, 0.8, 1.02, 1.4, 2.5] {
            let w = varpi(omega, &a).unwrap();
            assert_eq!(w.im, 0.0);
        }
    }

    #[test]
    fn response_scales_inversely_with_frequency_units() {
        let a = atom(1.0, 0.97, 0.3, 0.05);
        for c in [0.5, 3.0, 17.0] {
            let scaled = atom(c, 0.97 * c, 0.3 * c, 0.05 * c);
            for omega in [0.6, 0.99, 1.2] {
                let w = varpi(omega, &a).unwrap();
                let ws = varpi(omega * c, &scaled).unwrap();
                assert!((ws * c - w).norm() <= 1e-12 * w.norm());
            }
        }
    }

    #[test]
    fn chain_validation() {
        let chain = ChainConfig::periodic(AtomParams::new(1.0, 0.2, 0.1, 0.1, 0.1), 4, 0.5);
        chain.validate().unwrap();
        assert_eq!(chain.atoms[3].position, 2.0);
        assert_eq!(chain.origin(), 0.0);

        let mut bad = chain.clone();
        bad.atoms[2].position = bad.atoms[1].position;
        assert!(bad.validate().is_err());

        let mut bad = chain;
        bad.atoms[0].gamma2 = -0.1;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn linewidth_conversion() {
        let a = AtomParams::new(1.0, 0.2, 0.1, 0.4, 0.04);
        let c = WidthConvention::Linewidth.to_coupling(a);
        assert_eq!(c.gamma2, 0.05);
        assert_eq!(c.gamma_r, 0.1);
        assert_eq!(c.gamma_l, 0.01);
        assert_eq!(WidthConvention::Coupling.to_coupling(a), a);
    }

    #[test]
    fn phase_at_half_wavelength_spacing() {
        let wg = WaveguideParams::symmetric();
        // q_R + q_L = 2 at ω = 1, so (q_R+q_L)·(λ/2)·λ_len/2 = π
        let phi = wg.half_phase(1.0, 0.5);
        assert!((phi - std::f64::consts::PI).abs() < 1e-15);
    }
}
