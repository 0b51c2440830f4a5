//! Transmission through chiral (unidirectional) waveguides.
//!
//! Each atom multiplies the right-moving amplitude by a hop factor, so the
//! chain transmission is a product over atoms and cannot depend on where the
//! atoms sit. Under i.i.d. Gaussian frequency disorder the averages factorize
//! into single-atom Gaussian integrals, evaluated here by adaptive quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{is_degenerate, AtomParams, ChainConfig, I};
use crate::quadrature::{self, Tolerance};

/// ln T below which T is reported as zero (binary64 underflow).
pub const LN_UNDERFLOW: f64 = -745.0;

/// Gaussian support is truncated at this many standard deviations.
pub const GAUSSIAN_HALF_WIDTH: f64 = 12.0;

/// Amplitude ratio φ(xⱼ+ε)/φ(xⱼ−ε) across one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralHopFactor(pub Complex64);

impl ChiralHopFactor {
    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn transmission(self) -> f64 {
        self.0.norm_sqr()
    }
}

/// τ(δ₂) for an atom with ω₃ = ω₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDetuningAmplitude(pub Complex64);

impl ReducedDetuningAmplitude {
    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }
}

/// Hop factor of a single atom, using `gamma_r` as its coupling width.
pub fn hop_factor(omega: f64, atom: &AtomParams) -> Result<ChiralHopFactor> {
    let gamma = atom.gamma_r;
    let d2 = Complex64::new(omega - atom.omega2, atom.gamma2);
    let (num, den, scale) = if atom.rabi == 0.0 {
        // (ω−ω₃) cancels from numerator and denominator
        (d2 - I * gamma, d2 + I * gamma, d2.norm() + gamma)
    } else {
        let d3 = omega - atom.omega3;
        let q = 0.25 * atom.rabi * atom.rabi;
        let base = d2 * d3 - q;
        let coupling = I * (gamma * d3);
        (
            base - coupling,
            base + coupling,
            d2.norm() * d3.abs() + q + gamma * d3.abs(),
        )
    };
    if is_degenerate(den, scale) {
        return Err(Error::DegeneratePole { omega });
    }
    Ok(ChiralHopFactor(num / den))
}

fn require_chiral(chain: &ChainConfig) -> Result<()> {
    match chain.atoms.iter().position(|a| !a.is_chiral()) {
        Some(j) => Err(Error::InvalidRegime(format!(
            "atom {j} has gamma_l = {} in a chiral chain",
            chain.atoms[j].gamma_l
        ))),
        None => Ok(()),
    }
}

/// ln T = Σⱼ ln|Tⱼ|²; −∞ when some atom transmits exactly nothing.
pub fn chain_log_transmission(omega: f64, chain: &ChainConfig) -> Result<f64> {
    require_chiral(chain)?;
    let mut ln_t = 0.0;
    for atom in &chain.atoms {
        ln_t += 2.0 * hop_factor(omega, atom)?.0.norm().ln();
    }
    Ok(ln_t)
}

/// T = ∏ⱼ |Tⱼ|², accumulated in log space.
pub fn chain_transmission(omega: f64, chain: &ChainConfig) -> Result<f64> {
    Ok(exp_transmission(chain_log_transmission(omega, chain)?))
}

pub(crate) fn exp_transmission(ln_t: f64) -> f64 {
    if ln_t < LN_UNDERFLOW {
        0.0
    } else {
        ln_t.exp()
    }
}

/// τ(δ₂) = [δ₂² − (Ω/2)² + i(γ₂−Γ)δ₂] / [δ₂² − (Ω/2)² + i(γ₂+Γ)δ₂].
pub fn tau(delta2: f64, rabi: f64, gamma2: f64, gamma: f64) -> ReducedDetuningAmplitude {
    let base = delta2 * delta2 - 0.25 * rabi * rabi;
    let num = Complex64::new(base, (gamma2 - gamma) * delta2);
    let den = Complex64::new(base, (gamma2 + gamma) * delta2);
    if den.norm_sqr() == 0.0 {
        // only reachable with γ₂ + Γ = 0, where numerator and denominator coincide
        return ReducedDetuningAmplitude(Complex64::new(1.0, 0.0));
    }
    ReducedDetuningAmplitude(num / den)
}

fn tau_sq(delta2: f64, rabi: f64, gamma2: f64, gamma: f64) -> f64 {
    let base = delta2 * delta2 - 0.25 * rabi * rabi;
    let num = base * base + ((gamma2 - gamma) * delta2).powi(2);
    let den = base * base + ((gamma2 + gamma) * delta2).powi(2);
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

fn gaussian_breakpoints(mean: f64, sigma: f64, features: &[f64]) -> Vec<f64> {
    let lo = mean - GAUSSIAN_HALF_WIDTH * sigma;
    let hi = mean + GAUSSIAN_HALF_WIDTH * sigma;
    let mut points = vec![lo, hi, mean];
    points.extend(features.iter().copied().filter(|&x| x > lo && x < hi));
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

fn validate_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    Ok(())
}

/// ⟨|τ|²⟩ over δ₂ ~ N(mean_delta2, σ²).
pub fn avg_tau_sq(mean_delta2: f64, sigma: f64, rabi: f64, gamma2: f64, gamma: f64) -> Result<f64> {
    validate_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(tau_sq(mean_delta2, rabi, gamma2, gamma));
    }
    let norm = 1.0 / (sigma * std::f64::consts::TAU.sqrt());
    let half = 0.5 * rabi;
    let width = gamma2 + gamma;
    let features = [0.0, -half, half, -half - width, half + width, -width, width];
    let points = gaussian_breakpoints(mean_delta2, sigma, &features);
    let est = quadrature::integrate(
        |d| {
            let z = (d - mean_delta2) / sigma;
            norm * (-0.5 * z * z).exp() * tau_sq(d, rabi, gamma2, gamma)
        },
        &points,
        Tolerance::default(),
    )?;
    Ok(est.value.clamp(0.0, 1.0))
}

/// ⟨T⟩ = avgᴺ for an N-atom chain with i.i.d. disorder.
pub fn avg_chain_transmission(n: u64, avg: f64) -> f64 {
    if avg <= 0.0 {
        return 0.0;
    }
    exp_transmission(n as f64 * avg.ln())
}

/// Inverse localization length ξ⁻¹ = −⟨ln|τ|²⟩ at critical coupling (γ₂ = Γ).
///
/// Integrated in the scaled detuning x = δ₂/2Γ, where
/// |τ|² = (x² − Ω²/16Γ²)² / [(x² − Ω²/16Γ²)² + x²] vanishes at x = ±Ω/4Γ;
/// the logarithm is split at both zeros. `sigma = 0` returns the point value.
pub fn xi_inverse_chiral(
    mean_delta2: f64,
    sigma: f64,
    rabi: f64,
    gamma2: f64,
    gamma: f64,
) -> Result<f64> {
    validate_sigma(sigma)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coupling width must be positive, got {gamma}"
        )));
    }
    if (gamma2 - gamma).abs() > 1e-12 * gamma.max(gamma2) {
        return Err(Error::InvalidRegime(format!(
            "closed-form localization length needs critical coupling, got gamma2 = {gamma2}, Gamma = {gamma}"
        )));
    }
    if sigma == 0.0 {
        // + 0.0 folds -0 into +0 so that 1/ξ⁻¹ is +inf for a lossless point.
        return Ok(-tau_sq(mean_delta2, rabi, gamma, gamma).ln() + 0.0);
    }

    let root = rabi / (4.0 * gamma);
    let ln_tau_sq = |x: f64| {
        let shifted = ((x - root) * (x + root)).abs().max(f64::MIN_POSITIVE);
        2.0 * shifted.ln() - (shifted * shifted + x * x).ln()
    };
    let scale = 2.0 * gamma;
    let norm = scale / (sigma * std::f64::consts::TAU.sqrt());
    let mean_x = mean_delta2 / scale;
    let sigma_x = sigma / scale;
    let points = gaussian_breakpoints(mean_x, sigma_x, &[0.0, -root, root]);
    let est = quadrature::integrate(
        |x| {
            let z = (scale * x - mean_delta2) / sigma;
            norm * (-0.5 * z * z).exp() * ln_tau_sq(x)
        },
        &points,
        Tolerance::default(),
    )?;
    Ok((-est.value).max(0.0))
}
