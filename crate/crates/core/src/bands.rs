//! Bloch dispersion of periodic chains in bidirectional waveguides.
//!
//! All relations assume γ₂ = 0. Λ² ≡ δ₂δ₃ − (Ω/2)², which is δ₂² − (Ω/2)²
//! for ω₃ = ω₂. Widths are in the coupling convention; the closed forms are
//! written for linewidths Γ' = 4Γ and converted here.

use num_complex::Complex64;

use crate::bidirectional::local_transfer_matrix;
use crate::error::{Error, Result};
use crate::model::{is_degenerate, AtomParams, WaveguideParams, LINEWIDTH_COUPLING_SCALE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub omega: f64,
    /// Right-hand side of the dispersion relation.
    pub cos_kl: f64,
    /// Bloch wavenumber in [0, π/L], in units of 1/λ.
    pub k_real: f64,
    /// Attenuation per unit length inside gaps, in units of 1/λ; 0 in bands.
    pub k_imag: f64,
    pub allowed: bool,
}

impl DispersionPoint {
    /// Resolves cos(KL) into reduced-zone K for a lattice constant `l` (units of λ).
    pub fn new(omega: f64, cos_kl: f64, l: f64) -> Self {
        let allowed = cos_kl.abs() <= 1.0;
        let (k_real, k_imag) = if allowed {
            (cos_kl.acos() / l, 0.0)
        } else if cos_kl > 0.0 {
            (0.0, cos_kl.acosh() / l)
        } else {
            (std::f64::consts::PI / l, (-cos_kl).acosh() / l)
        };
        Self {
            omega,
            cos_kl,
            k_real,
            k_imag,
            allowed,
        }
    }
}

/// Which dispersion relation a scan evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandModel {
    /// Requires Γ_R = Γ_L and v_R = v_L.
    #[default]
    Symmetric,
    /// Closed form for unequal couplings and velocities.
    General,
    /// Normalized half-trace of the numerically built unit-cell matrix.
    Transfer,
}

impl std::str::FromStr for BandModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Self::Symmetric),
            "general" => Ok(Self::General),
            "transfer" => Ok(Self::Transfer),
            other => Err(Error::InvalidParameter(format!(
                "unknown band model '{other}' (expected symmetric, general or transfer)"
            ))),
        }
    }
}

impl std::fmt::Display for BandModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Symmetric => "symmetric",
            Self::General => "general",
            Self::Transfer => "transfer",
        })
    }
}

fn require_lossless(atom: &AtomParams) -> Result<()> {
    if atom.gamma2 != 0.0 {
        return Err(Error::InvalidRegime(format!(
            "dispersion relation needs gamma2 = 0, got {}",
            atom.gamma2
        )));
    }
    Ok(())
}

/// (Λ², δ, scale) with δ the detuning multiplying the coupling terms.
fn detunings(omega: f64, atom: &AtomParams) -> (f64, f64, f64) {
    let d2 = omega - atom.omega2;
    if atom.rabi == 0.0 {
        // two-level limit: the (ω−ω₃) factor cancels
        return (d2 * d2, d2, d2 * d2);
    }
    let d3 = omega - atom.omega3;
    let q = 0.25 * atom.rabi * atom.rabi;
    (d2 * d3 - q, d3, (d2 * d3).abs() + q)
}

fn check_l(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lattice constant must be positive, got {l}"
        )));
    }
    Ok(())
}

/// cos(KL) = ([Λ⁴ − (Γ_R'² − Γ_L'²)(δ/4)²] cos θ + [Λ²Γ_R'δ/2] sin θ) / [Λ⁴ + (Γ_R' − Γ_L')²(δ/4)²]
/// with θ = (q_R + q_L)L/2.
pub fn cos_kl_general(omega: f64, atom: &AtomParams, wg: &WaveguideParams, l: f64) -> Result<f64> {
    require_lossless(atom)?;
    check_l(l)?;
    wg.validate()?;
    let (lam2, delta, scale) = detunings(omega, atom);
    let gr = LINEWIDTH_COUPLING_SCALE * atom.gamma_r;
    let gl = LINEWIDTH_COUPLING_SCALE * atom.gamma_l;
    let d4 = delta / 4.0;
    let den = lam2 * lam2 + (gr - gl).powi(2) * d4 * d4;
    if is_degenerate(
        Complex64::new(den, 0.0),
        scale * scale + (gr - gl).powi(2) * d4 * d4,
    ) {
        return Err(Error::PoleAtDressedState { omega });
    }
    let theta = wg.half_phase(omega, l);
    let num = (lam2 * lam2 - (gr * gr - gl * gl) * d4 * d4) * theta.cos()
        + (lam2 * gr * delta / 2.0) * theta.sin();
    Ok(num / den)
}

/// cos(KL) = cos(qL) + (δΓ'/2Λ²) sin(qL) for Γ_R = Γ_L and v_R = v_L.
pub fn cos_kl_symmetric(
    omega: f64,
    atom: &AtomParams,
    wg: &WaveguideParams,
    l: f64,
) -> Result<f64> {
    require_lossless(atom)?;
    check_l(l)?;
    wg.validate()?;
    if atom.gamma_r != atom.gamma_l || wg.v_r != wg.v_l {
        return Err(Error::InvalidRegime(
            "symmetric dispersion needs gamma_r = gamma_l and v_r = v_l".into(),
        ));
    }
    let (lam2, delta, scale) = detunings(omega, atom);
    if is_degenerate(Complex64::new(lam2, 0.0), scale) {
        return Err(Error::PoleAtDressedState { omega });
    }
    let gamma = LINEWIDTH_COUPLING_SCALE * atom.gamma_r;
    let ql = wg.q_r(omega) * l * wg.wavelength;
    Ok(ql.cos() + delta * gamma / (2.0 * lam2) * ql.sin())
}

/// (λ₁ + λ₂)/2 of the unit-cell matrix with spacing `l`.
pub fn transfer_half_trace(
    omega: f64,
    atom: &AtomParams,
    wg: &WaveguideParams,
    l: f64,
) -> Result<Complex64> {
    check_l(l)?;
    let m = local_transfer_matrix(omega, atom, wg.half_phase(omega, l), wg)
        .map_err(|e| pole_as_dressed(e, omega))?;
    Ok(0.5 * m.stored_trace() * m.log_scale.exp())
}

/// Determinant of the unit-cell matrix with spacing `l`.
pub fn transfer_determinant(
    omega: f64,
    atom: &AtomParams,
    wg: &WaveguideParams,
    l: f64,
) -> Result<Complex64> {
    check_l(l)?;
    let m = local_transfer_matrix(omega, atom, wg.half_phase(omega, l), wg)
        .map_err(|e| pole_as_dressed(e, omega))?;
    Ok(m.stored_det() * (2.0 * m.log_scale).exp())
}

/// Re[tr 𝒯 / (2√det 𝒯)]: the eigenvalues are √det·e^{±iKL}.
pub fn cos_kl_transfer(omega: f64, atom: &AtomParams, wg: &WaveguideParams, l: f64) -> Result<f64> {
    require_lossless(atom)?;
    let half_trace = transfer_half_trace(omega, atom, wg, l)?;
    let det = transfer_determinant(omega, atom, wg, l)?;
    Ok((half_trace / det.sqrt()).re)
}

fn pole_as_dressed(e: Error, omega: f64) -> Error {
    match e {
        Error::DegeneratePole { .. } => Error::PoleAtDressedState { omega },
        other => other,
    }
}

/// Evaluates `model` at one frequency.
pub fn cos_kl(
    model: BandModel,
    omega: f64,
    atom: &AtomParams,
    wg: &WaveguideParams,
    l: f64,
) -> Result<f64> {
    match model {
        BandModel::Symmetric => cos_kl_symmetric(omega, atom, wg, l),
        BandModel::General => cos_kl_general(omega, atom, wg, l),
        BandModel::Transfer => cos_kl_transfer(omega, atom, wg, l),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BandScan {
    pub points: Vec<DispersionPoint>,
    /// Grid frequencies that sit on a dressed-state pole and were not evaluated.
    pub skipped: Vec<f64>,
    /// Dressed-state poles inside the scanned range.
    pub poles: Vec<f64>,
    /// Maximal runs of forbidden points, as (first ω, last ω).
    pub gaps: Vec<(f64, f64)>,
    /// Maximal runs of allowed points, as (first ω, last ω).
    pub bands: Vec<(f64, f64)>,
}

/// Real roots of (ω−ω₂)(ω−ω₃) = (Ω/2)², or ω₂ alone in the two-level limit.
pub fn dressed_poles(atom: &AtomParams) -> Vec<f64> {
    if atom.rabi == 0.0 {
        return vec![atom.omega2];
    }
    let mid = 0.5 * (atom.omega2 + atom.omega3);
    let half = 0.5 * (atom.omega2 - atom.omega3);
    let r = (half * half + 0.25 * atom.rabi * atom.rabi).sqrt();
    vec![mid - r, mid + r]
}

fn runs(points: &[DispersionPoint], allowed: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut last = 0.0;
    for p in points {
        if p.allowed == allowed {
            start.get_or_insert(p.omega);
            last = p.omega;
        } else if let Some(s) = start.take() {
            out.push((s, last));
        }
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

/// Evaluates the dispersion relation on a strictly increasing grid and
/// extracts band and gap intervals. Pole points are flagged, not evaluated.
pub fn scan_bands(
    grid: &[f64],
    atom: &AtomParams,
    wg: &WaveguideParams,
    l: f64,
    model: BandModel,
) -> Result<BandScan> {
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter(
            "frequency grid must be finite and strictly increasing".into(),
        ));
    }
    let mut scan = BandScan::default();
    for &omega in grid {
        match cos_kl(model, omega, atom, wg, l) {
            Ok(c) => scan.points.push(DispersionPoint::new(omega, c, l)),
            Err(Error::PoleAtDressedState { .. }) => scan.skipped.push(omega),
            Err(e) => return Err(e),
        }
    }
    if let (Some(&lo), Some(&hi)) = (grid.first(), grid.last()) {
        scan.poles = dressed_poles(atom)
            .into_iter()
            .filter(|p| (lo..=hi).contains(p))
            .collect();
    }
    scan.gaps = runs(&scan.points, false);
    scan.bands = runs(&scan.points, true);
    Ok(scan)
}

/// `points` frequencies spaced uniformly over [start, stop].
pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        n => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn symmetric_atom(rabi: f64, gamma: f64) -> AtomParams {
        AtomParams::new(1.0, rabi, 0.0, gamma, gamma)
    }

    #[test]
    fn eit_point_is_free_propagation() {
        let atom = symmetric_atom(0.2, 0.1);
        let wg = WaveguideParams::symmetric();
        let c = cos_kl_symmetric(1.0, &atom, &wg, 0.37).unwrap();
        assert!((c - (2.0 * std::f64::consts::PI * 0.37).cos()).abs() < 1e-15);
        // half-wavelength spacing puts the EIT point on a band edge
        let c = cos_kl_symmetric(1.0, &atom, &wg, 0.5).unwrap();
        assert!((c + 1.0).abs() < 1e-15);
        let asym = AtomParams::new(1.0, 0.2, 0.0, 0.1, 0.01);
        let wg10 = WaveguideParams::symmetric().with_v_l(10.0);
        let c = cos_kl_general(1.0, &asym, &wg10, 0.5).unwrap();
        assert!((c - wg10.half_phase(1.0, 0.5).cos()).abs() < 1e-15);
    }

    #[test]
    fn dressed_pole_is_reported() {
        let atom = symmetric_atom(0.5, 0.1);
        let wg = WaveguideParams::symmetric();
        assert!(matches!(
            cos_kl_symmetric(1.25, &atom, &wg, 0.5),
            Err(Error::PoleAtDressedState { .. })
        ));
        assert!(matches!(
            cos_kl_general(1.25, &atom, &wg, 0.5),
            Err(Error::PoleAtDressedState { .. })
        ));
    }

    #[test]
    fn lossy_atoms_are_rejected() {
        let atom = AtomParams::new(1.0, 0.2, 0.1, 0.1, 0.1);
        assert!(matches!(
            cos_kl_symmetric(1.05, &atom, &WaveguideParams::symmetric(), 0.5),
            Err(Error::InvalidRegime(_))
        ));
    }

    #[test]
    fn symmetric_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let wg = WaveguideParams::symmetric();
        for _ in 0..1000 {
            let atom = symmetric_atom(rng.random_range(0.01..0.5), rng.random_range(0.01..0.5));
            let omega = rng.random_range(0.5..1.5);
            let l = rng.random_range(0.05..2.0);
            let Ok(c) = cos_kl_symmetric(omega, &atom, &wg, l) else {
                continue;
            };
            let m = local_transfer_matrix(omega, &atom, wg.half_phase(omega, l), &wg).unwrap();
            let [a, b] = m.eigenvalues();
            let scale = c.abs().max(1.0);
            assert!(((a * b) - 1.0).norm() < 1e-9 * scale * scale);
            assert!(((a + b) / 2.0 - c).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn general_reduces_to_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let wg = WaveguideParams::symmetric();
        for _ in 0..1000 {
            let atom = symmetric_atom(rng.random_range(0.0..0.5), rng.random_range(0.01..0.5));
            let omega = rng.random_range(0.5..1.5);
            let l = rng.random_range(0.05..2.0);
            if let (Ok(a), Ok(b)) = (
                cos_kl_general(omega, &atom, &wg, l),
                cos_kl_symmetric(omega, &atom, &wg, l),
            ) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn point_reconstructs_cos() {
        for c in [-7.5, -1.0, -0.3, 0.0, 0.99, 1.0, 1.7, 40.0] {
            let p = DispersionPoint::new(0.0, c, 0.5);
            let back = (p.k_real * 0.5).cos() * (p.k_imag * 0.5).cosh();
            assert!((back - c).abs() < 1e-10 * c.abs().max(1.0));
            assert_eq!(p.allowed, p.k_imag == 0.0);
            assert!((0.0..=std::f64::consts::PI / 0.5).contains(&p.k_real));
        }
    }

    #[test]
    fn two_level_gap_at_transition() {
        let atom = symmetric_atom(0.0, 0.1);
        let grid = uniform_grid(0.9, 1.1, 2001);
        let scan = scan_bands(
            &grid,
            &atom,
            &WaveguideParams::symmetric(),
            0.1,
            BandModel::Symmetric,
        )
        .unwrap();
        assert_eq!(scan.poles, vec![1.0]);
        assert!(scan.gaps.iter().any(|&(a, b)| a < 1.0 && b > 1.0));
    }

    #[test]
    fn eit_point_is_allowed_for_lambda_atoms() {
        let atom = symmetric_atom(0.2, 0.1);
        let grid = uniform_grid(0.8, 1.2, 401);
        let scan = scan_bands(
            &grid,
            &atom,
            &WaveguideParams::symmetric(),
            0.1,
            BandModel::Symmetric,
        )
        .unwrap();
        let eit = scan.points.iter().find(|p| p.omega == 1.0).unwrap();
        assert!(eit.allowed);
        assert_eq!(scan.poles.len(), 2);
    }

    #[test]
    fn grid_must_increase() {
        let atom = symmetric_atom(0.2, 0.1);
        assert!(scan_bands(
            &[1.0, 1.0],
            &atom,
            &WaveguideParams::symmetric(),
            0.5,
            BandModel::Symmetric
        )
        .is_err());
    }

    #[test]
    fn uniform_grid_endpoints() {
        assert_eq!(uniform_grid(1.0, 1.0, 1), vec![1.0]);
        let g = uniform_grid(0.1, 0.7, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[6], 0.7);
    }
}
