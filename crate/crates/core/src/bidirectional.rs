//! Single-photon scattering in bidirectional waveguides.
//!
//! Between atoms the field is a right-moving wave with amplitude tⱼ and a
//! left-moving wave with amplitude rⱼ. With the phase-stripped amplitudes
//! t̃ⱼ = tⱼ e^{iQxⱼ/2}, r̃ⱼ = rⱼ e^{−iQxⱼ₋₁/2} (Q = q_R + q_L) the jump
//! conditions at atom j become (t̃ⱼ, r̃ⱼ₊₁)ᵀ = 𝒯ⱼ (t̃ⱼ₋₁, r̃ⱼ)ᵀ. The boundary
//! data are t̃₀ = 1 (incident photon) and r̃_{N+1} = 0 (nothing enters from
//! the right).
//!
//! [`direct_jump_solver`] solves the unreduced jump conditions as one dense
//! linear system and serves as an oracle for the transfer-matrix path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chiral::exp_transmission;
use crate::error::{Error, Result};
use crate::model::{
    varpi, AtomParams, ChainConfig, WaveguideParams, I, LINEWIDTH_COUPLING_SCALE,
    LINEWIDTH_DECAY_SCALE, SINGULAR_FLOOR,
};
use crate::transfer::TransferMatrix;

/// Above this 1-norm condition estimate the direct solve is rejected.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterResult {
    /// t̃ⱼ for j = 1..=N.
    pub t_amplitudes: Vec<Complex64>,
    /// r̃ⱼ for j = 1..=N; r̃_{N+1} = 0 is implicit.
    pub r_amplitudes: Vec<Complex64>,
    /// T = |t_N|².
    pub transmission: f64,
    /// R = |r₁|².
    pub reflection: f64,
    /// ln T, finite even when T underflows.
    pub ln_transmission: f64,
}

fn check(z: Complex64, what: &str) -> Result<Complex64> {
    if z.norm() < SINGULAR_FLOOR || !z.is_finite() {
        return Err(Error::SingularElement(what.to_string()));
    }
    Ok(z)
}

fn require_bidirectional(wg: &WaveguideParams) -> Result<()> {
    wg.validate()?;
    if wg.is_chiral() {
        return Err(Error::InvalidRegime(
            "bidirectional solver needs v_l > 0; use the chiral solver".into(),
        ));
    }
    Ok(())
}

/// 𝒯ⱼ for one atom, with φⱼ the half phase accumulated since the previous atom.
///
/// With x = Γ_Rϖ and y = Γ_Lϖ, and the auxiliary quantities
/// α_{R/L} = (1 ∓ iΓ_{R/L}ϖ)/(1 ± iΓ_{R/L}ϖ), β_{R/L} = √(Γ_RΓ_L)ϖ/(1 ± iΓ_{R/L}ϖ),
/// eliminating (t̃ⱼ, r̃ⱼ₊₁) from the jump conditions gives
///
/// ```text
/// m11 = (α_R + β_Rβ_L)/(1 − β_Rβ_L) e^{iφ}       = (1 − i(x+y))/(1 + i(x−y)) e^{iφ}
/// m12 = −i√(v_L/v_R) β_R(1+α_L)/(1 − β_Rβ_L) e^{−iφ} = −2i√(v_L/v_R)√(Γ_RΓ_L)ϖ/(1 + i(x−y)) e^{−iφ}
/// m21 = i√(v_R/v_L) β_L(1+α_R)/(1 − β_Rβ_L) e^{iφ}   = 2i√(v_R/v_L)√(Γ_RΓ_L)ϖ/(1 + i(x−y)) e^{iφ}
/// m22 = (α_L + β_Rβ_L)/(1 − β_Rβ_L) e^{−iφ}      = (1 + i(x+y))/(1 + i(x−y)) e^{−iφ}
/// ```
///
/// The right-hand forms are used; they avoid the cancellation in 1 − β_Rβ_L.
pub fn local_transfer_matrix(
    omega: f64,
    atom: &AtomParams,
    spacing_phase: f64,
    wg: &WaveguideParams,
) -> Result<TransferMatrix> {
    require_bidirectional(wg)?;
    let w = varpi(omega, atom)?;
    let x = atom.gamma_r * w;
    let y = atom.gamma_l * w;
    let cross = 2.0 * (atom.gamma_r * atom.gamma_l).sqrt() * w;
    let velocity_ratio = (wg.v_l / wg.v_r).sqrt();
    let den = check(1.0 + I * (x - y), "1 + i(x - y)")?;
    let fwd = Complex64::from_polar(1.0, spacing_phase);
    let bwd = fwd.conj();
    TransferMatrix::from_elements([
        [
            (1.0 - I * (x + y)) / den * fwd,
            -I * velocity_ratio * cross / den * bwd,
        ],
        [
            I * cross / (velocity_ratio * den) * fwd,
            (1.0 + I * (x + y)) / den * bwd,
        ],
    ])
}

/// 𝒯ⱼ assembled with the m21 and m22 entries in the alternative form
/// m21 = i√(v_R/v_L) β_L(1−α_R)/(1+β_Lβ_R) e^{iφ},
/// m22 = (α_L − β_Lβ_R)/(1+β_Lβ_R) e^{−iφ}.
///
/// This form does not satisfy the jump conditions once Γ_L > 0 (it is not
/// passive when γ₂ > 0) and is kept only so the discrepancy can be measured.
pub fn local_transfer_matrix_as_printed(
    omega: f64,
    atom: &AtomParams,
    spacing_phase: f64,
    wg: &WaveguideParams,
) -> Result<TransferMatrix> {
    require_bidirectional(wg)?;
    let w = varpi(omega, atom)?;
    let g = (atom.gamma_r * atom.gamma_l).sqrt();
    let pr = check(1.0 + I * atom.gamma_r * w, "1 + iΓ_Rϖ")?;
    let pl = check(1.0 - I * atom.gamma_l * w, "1 - iΓ_Lϖ")?;
    let alpha_r = (1.0 - I * atom.gamma_r * w) / pr;
    let alpha_l = (1.0 + I * atom.gamma_l * w) / pl;
    let beta_r = g * w / pr;
    let beta_l = g * w / pl;
    let minus = check(1.0 - beta_r * beta_l, "1 - β_Rβ_L")?;
    let plus = check(1.0 + beta_l * beta_r, "1 + β_Lβ_R")?;
    let s = (wg.v_l / wg.v_r).sqrt();
    let fwd = Complex64::from_polar(1.0, spacing_phase);
    let bwd = fwd.conj();
    TransferMatrix::from_elements([
        [
            (alpha_r + beta_r * beta_l) / minus * fwd,
            -I * s * beta_r * (1.0 + alpha_l) / minus * bwd,
        ],
        [
            I / s * beta_l * (1.0 - alpha_r) / plus * fwd,
            (alpha_l - beta_l * beta_r) / plus * bwd,
        ],
    ])
}

type LocalBuilder = fn(f64, &AtomParams, f64, &WaveguideParams) -> Result<TransferMatrix>;

fn local_matrices(
    omega: f64,
    chain: &ChainConfig,
    wg: &WaveguideParams,
    build: LocalBuilder,
) -> Result<Vec<TransferMatrix>> {
    let mut previous = chain.origin();
    chain
        .atoms
        .iter()
        .map(|atom| {
            let phase = wg.half_phase(omega, atom.position - previous);
            previous = atom.position;
            build(omega, atom, phase, wg)
        })
        .collect()
}

/// Net matrix M = 𝒯_N ⋯ 𝒯₁ together with Σⱼ ln det 𝒯ⱼ.
fn net_matrix(locals: &[TransferMatrix]) -> Result<(TransferMatrix, Complex64)> {
    let mut net = TransferMatrix::identity();
    let mut log_det = Complex64::new(0.0, 0.0);
    for local in locals {
        net = local.mul(&net)?;
        log_det += local.log_det();
    }
    Ok((net, log_det))
}

/// Interior amplitudes from the backward reflection-ratio sweep.
///
/// ρⱼ = r̃ⱼ₊₁/t̃ⱼ starts at ρ_N = 0 and obeys
/// ρⱼ₋₁ = (m21 − m11ρⱼ)/(m12ρⱼ − m22); then t̃ⱼ = t̃ⱼ₋₁(m11 + m12ρⱼ₋₁) and
/// r̃ⱼ = ρⱼ₋₁t̃ⱼ₋₁ forward from t̃₀ = 1.
fn sweep_amplitudes(locals: &[TransferMatrix]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = locals.len();
    let mut rho = vec![Complex64::new(0.0, 0.0); n + 1];
    for j in (1..=n).rev() {
        let m = &locals[j - 1].m;
        let den = m[0][1] * rho[j] - m[1][1];
        if den.norm() < SINGULAR_FLOOR {
            return Err(Error::SingularElement(format!(
                "reflection sweep denominator at atom {j}"
            )));
        }
        rho[j - 1] = (m[1][0] - m[0][0] * rho[j]) / den;
    }
    let mut t_amp = Vec::with_capacity(n);
    let mut r_amp = Vec::with_capacity(n);
    let mut t_prev = Complex64::new(1.0, 0.0);
    for j in 1..=n {
        let local = &locals[j - 1];
        r_amp.push(rho[j - 1] * t_prev);
        let factor = (local.m[0][0] + local.m[0][1] * rho[j - 1]) * local.log_scale.exp();
        t_prev *= factor;
        t_amp.push(t_prev);
    }
    Ok((t_amp, r_amp))
}

fn scatter_with(
    omega: f64,
    chain: &ChainConfig,
    wg: &WaveguideParams,
    build: LocalBuilder,
) -> Result<ScatterResult> {
    chain.validate()?;
    require_bidirectional(wg)?;
    if chain.is_empty() {
        return Ok(ScatterResult {
            t_amplitudes: vec![],
            r_amplitudes: vec![],
            transmission: 1.0,
            reflection: 0.0,
            ln_transmission: 0.0,
        });
    }
    let locals = local_matrices(omega, chain, wg, build)?;
    let (net, log_det) = net_matrix(&locals)?;
    let m22 = net.m[1][1];
    if m22.norm() < SINGULAR_FLOOR {
        return Err(Error::SingularElement("net M22 vanishes".into()));
    }
    let r1 = -net.m[1][0] / m22;
    // t̃_N = det M / M22 with det M accumulated from the local determinants
    let ln_t = 2.0 * (log_det.re - net.log_scale - m22.norm().ln());
    if ln_t.is_nan() {
        return Err(Error::SingularElement("ln T is not a number".into()));
    }
    let (t_amplitudes, r_amplitudes) = sweep_amplitudes(&locals)?;
    Ok(ScatterResult {
        t_amplitudes,
        r_amplitudes,
        transmission: exp_transmission(ln_t),
        reflection: r1.norm_sqr(),
        ln_transmission: ln_t,
    })
}

/// Transmission, reflection and interior amplitudes of a bidirectional chain.
pub fn chain_scatter(
    omega: f64,
    chain: &ChainConfig,
    wg: &WaveguideParams,
) -> Result<ScatterResult> {
    scatter_with(omega, chain, wg, local_transfer_matrix)
}

/// [`chain_scatter`] with the alternative m21/m22 entries; diagnostic only.
pub fn chain_scatter_as_printed(
    omega: f64,
    chain: &ChainConfig,
    wg: &WaveguideParams,
) -> Result<ScatterResult> {
    scatter_with(omega, chain, wg, local_transfer_matrix_as_printed)
}

/// Closed-form single-atom amplitudes
///
/// ```text
/// t = [δ₂(δ₂ + iγ₂'/2) − (Ω/2)²] / [δ₂(δ₂ + i(γ₂'/2 + (Γ_R'+Γ_L')/4)) − (Ω/2)²]
/// r = −iδ₂√(Γ_R'Γ_L')/2 / [same denominator]
/// ```
///
/// written in the linewidth convention γ₂' = 2γ₂, Γ' = 4Γ. Arguments are in
/// the coupling convention and converted here. For Γ_R = Γ_L this is the exact
/// jump-condition solution.
pub fn single_atom_closed_form(
    delta2: f64,
    rabi: f64,
    gamma2: f64,
    gamma_r: f64,
    gamma_l: f64,
) -> Result<(Complex64, Complex64)> {
    let g2 = LINEWIDTH_DECAY_SCALE * gamma2;
    let gr = LINEWIDTH_COUPLING_SCALE * gamma_r;
    let gl = LINEWIDTH_COUPLING_SCALE * gamma_l;
    let q = 0.25 * rabi * rabi;
    let den = delta2 * (delta2 + I * (0.5 * g2 + 0.25 * (gr + gl))) - q;
    if den.norm() == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "closed form is singular at delta2 = {delta2} without any width"
        )));
    }
    let t = (delta2 * (delta2 + I * (0.5 * g2)) - q) / den;
    let r = -I * delta2 * (gr * gl).sqrt() / 2.0 / den;
    Ok((t, r))
}

/// Solves the jump conditions
///
/// ```text
/// −iv_R[φ_R(x⁺) − φ_R(x⁻)] + V_Rϖ(V_R φ̄_R + V_L φ̄_L) = 0
///  iv_L[φ_L(x⁺) − φ_L(x⁻)] + V_Lϖ(V_L φ̄_L + V_R φ̄_R) = 0
/// ```
///
/// (φ̄ the mean of both one-sided limits, V_m = √(2Γ_m v_m)) at every atom as a
/// single 2N×2N dense system in the unstripped amplitudes. O(N³); intended
/// for verification with N ≤ 200.
pub fn direct_jump_solver(
    omega: f64,
    chain: &ChainConfig,
    wg: &WaveguideParams,
) -> Result<ScatterResult> {
    chain.validate()?;
    require_bidirectional(wg)?;
    let n = chain.len();
    if n == 0 {
        return scatter_with(omega, chain, wg, local_transfer_matrix);
    }
    let q_r = wg.q_r(omega);
    let q_l = wg.q_l(omega);
    let t_idx = |j: usize| j - 1; // t_j, j = 1..=N
    let r_idx = |j: usize| n + j - 1; // r_j, j = 1..=N

    let mut a = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    let mut b = DVector::<Complex64>::zeros(2 * n);
    for (k, atom) in chain.atoms.iter().enumerate() {
        let j = k + 1;
        let x = atom.position * wg.wavelength;
        let w = varpi(omega, atom)?;
        let v_r = (2.0 * atom.gamma_r * wg.v_r).sqrt();
        let v_l = (2.0 * atom.gamma_l * wg.v_l).sqrt();
        let er = Complex64::from_polar(1.0, q_r * x);
        let el = Complex64::from_polar(1.0, -q_l * x);

        // coefficients of φ_R(x⁺), φ_R(x⁻), φ_L(x⁺), φ_L(x⁻) in each equation
        let right = [
            -I * wg.v_r + 0.5 * v_r * w * v_r,
            I * wg.v_r + 0.5 * v_r * w * v_r,
            0.5 * v_r * w * v_l,
            0.5 * v_r * w * v_l,
        ];
        let left = [
            0.5 * v_l * w * v_r,
            0.5 * v_l * w * v_r,
            I * wg.v_l + 0.5 * v_l * w * v_l,
            -I * wg.v_l + 0.5 * v_l * w * v_l,
        ];
        for (row, coeffs) in [(2 * k, right), (2 * k + 1, left)] {
            // φ_R(x⁺) = t_j e^{iq_R x}
            a[(row, t_idx(j))] += coeffs[0] * er;
            // φ_R(x⁻) = t_{j−1} e^{iq_R x}, t_0 = 1
            if j == 1 {
                b[row] -= coeffs[1] * er;
            } else {
                a[(row, t_idx(j - 1))] += coeffs[1] * er;
            }
            // φ_L(x⁺) = r_{j+1} e^{−iq_L x}, r_{N+1} = 0
            if j < n {
                a[(row, r_idx(j + 1))] += coeffs[2] * el;
            }
            // φ_L(x⁻) = r_j e^{−iq_L x}
            a[(row, r_idx(j))] += coeffs[3] * el;
        }
    }

    let norm1 = |m: &DMatrix<Complex64>| {
        m.column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let inverse = a.clone().try_inverse().ok_or(Error::SingularSystem {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(&a) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }
    let solution = a.lu().solve(&b).ok_or(Error::SingularSystem {
        condition: f64::INFINITY,
    })?;

    let half_q = 0.5 * (q_r + q_l);
    let mut previous = chain.origin() * wg.wavelength;
    // the system was solved for t₀ = 1; the stripped convention wants t̃₀ = 1
    let incident = Complex64::from_polar(1.0, -half_q * previous);
    let mut t_amplitudes = Vec::with_capacity(n);
    let mut r_amplitudes = Vec::with_capacity(n);
    for (k, atom) in chain.atoms.iter().enumerate() {
        let x = atom.position * wg.wavelength;
        t_amplitudes
            .push(incident * solution[t_idx(k + 1)] * Complex64::from_polar(1.0, half_q * x));
        r_amplitudes.push(
            incident * solution[r_idx(k + 1)] * Complex64::from_polar(1.0, -half_q * previous),
        );
        previous = x;
    }
    let transmission = t_amplitudes[n - 1].norm_sqr();
    Ok(ScatterResult {
        reflection: r_amplitudes[0].norm_sqr(),
        ln_transmission: transmission.ln(),
        transmission,
        t_amplitudes,
        r_amplitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_atom(rabi: f64, gamma2: f64, gamma: f64) -> AtomParams {
        AtomParams::new(1.0, rabi, gamma2, gamma, gamma)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn chiral_limit_is_diagonal() {
        let atom = AtomParams::new(1.0, 0.2, 0.1, 0.3, 0.0);
        let wg = WaveguideParams::symmetric();
        let phi = 0.37;
        let m = local_transfer_matrix(1.07, &atom, phi, &wg).unwrap();
        let hop = crate::chiral::hop_factor(1.07, &atom).unwrap().value();
        assert_eq!(m.element(0, 1), Complex64::new(0.0, 0.0));
        assert_eq!(m.element(1, 0), Complex64::new(0.0, 0.0));
        assert!(close(
            m.element(0, 0),
            hop * Complex64::from_polar(1.0, phi),
            1e-14
        ));
        assert!(close(
            m.element(1, 1),
            Complex64::from_polar(1.0, -phi),
            1e-14
        ));
    }

    #[test]
    fn free_propagation_at_two_photon_resonance() {
        let atom = AtomParams::new(1.0, 0.2, 0.1, 0.3, 0.03);
        let wg = WaveguideParams::symmetric().with_v_l(10.0);
        let m = local_transfer_matrix(1.0, &atom, 0.8, &wg).unwrap();
        assert!(close(
            m.element(0, 0),
            Complex64::from_polar(1.0, 0.8),
            1e-15
        ));
        assert!(close(
            m.element(1, 1),
            Complex64::from_polar(1.0, -0.8),
            1e-15
        ));
        assert_eq!(m.element(0, 1).norm(), 0.0);
    }

    #[test]
    fn simplified_elements_match_alpha_beta_assembly() {
        let atom = AtomParams::new(1.0, 0.23, 0.07, 0.31, 0.05);
        let wg = WaveguideParams::symmetric().with_v_l(3.0);
        for omega in [0.7, 0.93, 1.04, 1.2] {
            let w = varpi(omega, &atom).unwrap();
            let g = (atom.gamma_r * atom.gamma_l).sqrt();
            let ar = (1.0 - I * atom.gamma_r * w) / (1.0 + I * atom.gamma_r * w);
            let al = (1.0 + I * atom.gamma_l * w) / (1.0 - I * atom.gamma_l * w);
            let br = g * w / (1.0 + I * atom.gamma_r * w);
            let bl = g * w / (1.0 - I * atom.gamma_l * w);
            let d = 1.0 - br * bl;
            let s = (wg.v_l / wg.v_r).sqrt();
            let expect = [
                [(ar + br * bl) / d, -I * s * br * (1.0 + al) / d],
                [I / s * bl * (1.0 + ar) / d, (al + br * bl) / d],
            ];
            let m = local_transfer_matrix(omega, &atom, 0.0, &wg).unwrap();
            for (i, row) in expect.iter().enumerate() {
                for (j, &e) in row.iter().enumerate() {
                    assert!(close(m.element(i, j), e, 1e-13));
                }
            }
        }
    }

    #[test]
    fn single_atom_resonance_is_transparent() {
        let chain = ChainConfig::periodic(symmetric_atom(0.2, 0.1, 0.1), 1, 0.5);
        let res = chain_scatter(1.0, &chain, &WaveguideParams::symmetric()).unwrap();
        assert!((res.transmission - 1.0).abs() < 1e-14);
        assert!(res.reflection < 1e-28);
    }

    #[test]
    fn two_level_mirror() {
        let chain = ChainConfig::periodic(symmetric_atom(0.0, 0.0, 0.1), 1, 0.5);
        let res = chain_scatter(1.0 + 1e-9, &chain, &WaveguideParams::symmetric()).unwrap();
        assert!(res.transmission < 1e-14);
        assert!((res.reflection - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_closed_form_symmetric() {
        let atom = symmetric_atom(0.2, 0.05, 0.1);
        let chain = ChainConfig::periodic(atom, 1, 0.5);
        let wg = WaveguideParams::symmetric();
        for omega in [0.8, 0.9, 0.97, 1.03, 1.1, 1.4] {
            let res = chain_scatter(omega, &chain, &wg).unwrap();
            let (t, r) = single_atom_closed_form(omega - 1.0, 0.2, 0.05, 0.1, 0.1).unwrap();
            assert!((res.transmission - t.norm_sqr()).abs() < 1e-13);
            assert!((res.reflection - r.norm_sqr()).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(
            single_atom_closed_form(0.0, 0.2, 0.1, 0.1, 0.1).unwrap(),
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        );
        let (t, r) = single_atom_closed_form(1e7, 0.2, 0.1, 0.1, 0.1).unwrap();
        assert!((t - 1.0).norm() < 1e-7 && r.norm() < 1e-7);
        assert!(single_atom_closed_form(0.1, 0.2, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn direct_solver_matches_transfer_matrix() {
        let atom = AtomParams::new(1.0, 0.2, 0.1, 0.1, 0.01);
        let wg = WaveguideParams::symmetric().with_v_l(10.0);
        let chain = ChainConfig {
            atoms: vec![atom.at(0.3), atom.at(0.71), atom.at(1.5)],
            lattice_constant: 0.5,
        };
        for omega in [0.85, 0.95, 1.02, 1.2] {
            let tm = chain_scatter(omega, &chain, &wg).unwrap();
            let direct = direct_jump_solver(omega, &chain, &wg).unwrap();
            assert!((tm.transmission - direct.transmission).abs() < 1e-12);
            assert!((tm.reflection - direct.reflection).abs() < 1e-12);
            for (a, b) in tm.t_amplitudes.iter().zip(&direct.t_amplitudes) {
                assert!(close(*a, *b, 1e-12));
            }
            for (a, b) in tm.r_amplitudes.iter().zip(&direct.r_amplitudes) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn printed_form_breaks_passivity() {
        let chain = ChainConfig::periodic(symmetric_atom(0.2, 0.1, 0.4), 1, 0.5);
        let wg = WaveguideParams::symmetric();
        let printed = chain_scatter_as_printed(1.05, &chain, &wg).unwrap();
        assert!(printed.transmission + printed.reflection > 1.0);
        let derived = chain_scatter(1.05, &chain, &wg).unwrap();
        assert!(derived.transmission + derived.reflection < 1.0);
    }

    #[test]
    fn chiral_waveguide_is_rejected() {
        let chain = ChainConfig::periodic(symmetric_atom(0.2, 0.1, 0.1), 2, 0.5);
        assert!(matches!(
            chain_scatter(1.0, &chain, &WaveguideParams::chiral()),
            Err(Error::InvalidRegime(_))
        ));
    }

    #[test]
    fn deep_gap_keeps_log_transmission() {
        // two-level Bragg mirror: T decays exponentially with N
        let atom = symmetric_atom(0.0, 0.0, 0.1);
        let wg = WaveguideParams::symmetric();
        let short = chain_scatter(1.0005, &ChainConfig::periodic(atom, 500, 0.5), &wg).unwrap();
        let long = chain_scatter(1.0005, &ChainConfig::periodic(atom, 2000, 0.5), &wg).unwrap();
        assert!(long.ln_transmission < -745.0);
        assert_eq!(long.transmission, 0.0);
        let per_atom_short = short.ln_transmission / 500.0;
        let per_atom_long = long.ln_transmission / 2000.0;
        assert!((per_atom_short - per_atom_long).abs() < 0.01 * per_atom_long.abs());
        assert!((long.reflection - 1.0).abs() < 1e-10);
    }
}
