//! Seeded Monte Carlo over position and frequency disorder.
//!
//! Realization k draws from its own ChaCha8 stream keyed by (seed, k), and
//! results are reduced in realization order, so statistics do not depend on
//! the number of worker threads. Parallelism comes from the ambient rayon
//! pool; wrap calls in `ThreadPool::install` to pin a thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bidirectional::chain_scatter;
use crate::chiral::{chain_log_transmission, exp_transmission, LN_UNDERFLOW};
use crate::error::{Error, Result};
use crate::model::{ChainConfig, WaveguideParams};

/// Separation used to split coincident positions after sorting, in units of λ.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Slopes at or above this are treated as no decay.
pub const FLAT_SLOPE: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisorderKind {
    /// Each position drawn around its lattice site.
    Position,
    /// Each atom's excited-state frequency shifted by a random detuning.
    Frequency,
}

impl std::str::FromStr for DisorderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(Self::Position),
            "frequency" => Ok(Self::Frequency),
            other => Err(Error::InvalidParameter(format!(
                "unknown disorder kind '{other}' (expected position or frequency)"
            ))),
        }
    }
}

impl std::fmt::Display for DisorderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Position => "position",
            Self::Frequency => "frequency",
        })
    }
}

/// Gaussian disorder in one parameter.
///
/// For [`DisorderKind::Position`] the draws are centred on the template
/// positions and `mean` is the mean spacing (informational). For
/// [`DisorderKind::Frequency`] each atom gets ω₂ → ω₂ + d and ω₃ → ω₃ + d with
/// d ~ N(mean, σ²), so a probe at the template ω₂ sees detuning δ₂ = −d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    pub mean: f64,
    pub sigma: f64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disorder sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::InvalidParameter(
                "disorder mean must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    /// Realizations that contributed (excluded ones not counted).
    pub realizations: usize,
    pub mean_t: f64,
    pub stderr_t: f64,
    pub mean_ln_t: f64,
    pub stderr_ln_t: f64,
    /// −N/⟨ln T⟩; infinite when ⟨ln T⟩ = 0.
    pub xi_fixed_n: f64,
    pub base_seed: u64,
    pub n_atoms: usize,
    /// Realizations whose solver returned an error.
    pub excluded: usize,
    /// Realizations with an exact zero of T, recorded as ln T = −745.
    pub underflows: usize,
}

/// Realization `index` of the disordered chain. A pure function of its inputs.
pub fn sample_chain(
    template: &ChainConfig,
    spec: &DisorderSpec,
    seed: u64,
    index: u64,
) -> ChainConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut chain = template.clone();
    if spec.sigma == 0.0 && (spec.kind == DisorderKind::Position || spec.mean == 0.0) {
        return chain;
    }
    match spec.kind {
        DisorderKind::Position => {
            for atom in &mut chain.atoms {
                let z: f64 = StandardNormal.sample(&mut rng);
                atom.position += spec.sigma * z;
            }
            chain
                .atoms
                .sort_by(|a, b| a.position.total_cmp(&b.position));
            for j in 1..chain.atoms.len() {
                let floor = chain.atoms[j - 1].position + MIN_SEPARATION;
                if chain.atoms[j].position < floor {
                    chain.atoms[j].position = floor.max(chain.atoms[j - 1].position.next_up());
                }
            }
        }
        DisorderKind::Frequency => {
            for atom in &mut chain.atoms {
                let z: f64 = StandardNormal.sample(&mut rng);
                let d = spec.mean + spec.sigma * z;
                atom.omega2 += d;
                atom.omega3 += d;
            }
        }
    }
    chain
}

/// ln T of one chain, using the chiral product when v_L = 0.
pub fn log_transmission(omega: f64, chain: &ChainConfig, wg: &WaveguideParams) -> Result<f64> {
    if wg.is_chiral() {
        chain_log_transmission(omega, chain)
    } else {
        Ok(chain_scatter(omega, chain, wg)?.ln_transmission)
    }
}

/// Mean and standard error, accumulated relative to the first sample so a
/// constant sequence reproduces its value exactly with zero error.
fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let shift = samples[0];
    let (s, ss) = samples.iter().fold((0.0, 0.0), |(s, ss), &x| {
        let d = x - shift;
        (s + d, ss + d * d)
    });
    let mean = shift + s / n;
    let var = ((ss - s * s / n) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Runs `realizations` disorder draws at frequency `omega`.
pub fn run_ensemble(
    template: &ChainConfig,
    spec: &DisorderSpec,
    omega: f64,
    wg: &WaveguideParams,
    realizations: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    spec.validate()?;
    template.validate()?;
    wg.validate()?;
    if realizations < 2 {
        return Err(Error::InvalidParameter(format!(
            "an ensemble needs at least 2 realizations, got {realizations}"
        )));
    }
    let results: Vec<Result<f64>> = (0..realizations as u64)
        .into_par_iter()
        .map(|k| log_transmission(omega, &sample_chain(template, spec, seed, k), wg))
        .collect();

    let mut ln_t = Vec::with_capacity(realizations);
    let mut first_error = None;
    let mut underflows = 0;
    for r in results {
        match r {
            Ok(x) if x == f64::NEG_INFINITY => {
                underflows += 1;
                ln_t.push(LN_UNDERFLOW);
            }
            Ok(x) => ln_t.push(x),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if ln_t.len() < 2 {
        return Err(first_error.unwrap_or(Error::InvalidParameter(
            "fewer than 2 realizations succeeded".into(),
        )));
    }
    let t: Vec<f64> = ln_t.iter().map(|&x| exp_transmission(x)).collect();
    let (mean_t, stderr_t) = mean_stderr(&t);
    let (mean_ln_t, stderr_ln_t) = mean_stderr(&ln_t);
    let n_atoms = template.len();
    let xi_fixed_n = if mean_ln_t < 0.0 {
        -(n_atoms as f64) / mean_ln_t
    } else {
        f64::INFINITY
    };
    Ok(EnsembleStats {
        realizations: ln_t.len(),
        mean_t,
        stderr_t,
        mean_ln_t,
        stderr_ln_t,
        xi_fixed_n,
        base_seed: seed,
        n_atoms,
        excluded: realizations - ln_t.len(),
        underflows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// ξ = −1/b, in atoms.
    pub xi: f64,
    pub r_squared: f64,
    pub intercept: f64,
    pub slope: f64,
    /// One ensemble per chain length.
    pub ensembles: Vec<EnsembleStats>,
}

/// Least-squares (a, b, R²) for y = a + b·x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        0.0
    };
    (a, b, r2)
}

/// Fits ⟨ln T⟩ = a + b·N over chains of the given lengths and returns ξ = −1/b.
///
/// Each length uses a periodic chain built from the first atom and lattice
/// constant of `template`, and the same seed (common random numbers).
pub fn xi_from_slope(
    template: &ChainConfig,
    spec: &DisorderSpec,
    omega: f64,
    wg: &WaveguideParams,
    n_list: &[usize],
    realizations: usize,
    seed: u64,
) -> Result<SlopeFit> {
    let Some(atom) = template.atoms.first() else {
        return Err(Error::InvalidParameter("template chain is empty".into()));
    };
    if n_list.len() < 4 || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::InvalidParameter(
            "N list needs at least 4 distinct positive lengths in ascending order".into(),
        ));
    }
    let ensembles = n_list
        .iter()
        .map(|&n| {
            let chain = ChainConfig::periodic(*atom, n, template.lattice_constant);
            run_ensemble(&chain, spec, omega, wg, realizations, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = ensembles.iter().map(|s| s.mean_ln_t).collect();
    let (intercept, slope, r_squared) = linear_fit(&x, &y);
    if slope >= FLAT_SLOPE {
        return Err(Error::DegenerateFit { slope });
    }
    Ok(SlopeFit {
        xi: -1.0 / slope,
        r_squared,
        intercept,
        slope,
        ensembles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chiral::{avg_chain_transmission, avg_tau_sq, chain_transmission};
    use crate::model::AtomParams;

    fn chiral_atom() -> AtomParams {
        AtomParams::new(1.0, 0.2, 1.0, 1.0, 0.0)
    }

    #[test]
    fn zero_sigma_returns_template() {
        let template = ChainConfig::periodic(chiral_atom(), 10, 0.5);
        for kind in [DisorderKind::Position, DisorderKind::Frequency] {
            let spec = DisorderSpec {
                kind,
                mean: 0.0,
                sigma: 0.0,
            };
            assert_eq!(sample_chain(&template, &spec, 1, 7), template);
        }
    }

    #[test]
    fn sampling_is_a_pure_function() {
        let template = ChainConfig::periodic(chiral_atom(), 20, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Position,
            mean: 0.5,
            sigma: 1.0,
        };
        let a = sample_chain(&template, &spec, 42, 3);
        assert_eq!(a, sample_chain(&template, &spec, 42, 3));
        assert_ne!(a, sample_chain(&template, &spec, 42, 4));
        assert_ne!(a, sample_chain(&template, &spec, 43, 3));
        a.validate().unwrap();
    }

    #[test]
    fn frequency_draws_shift_both_levels() {
        let template = ChainConfig::periodic(chiral_atom(), 5, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Frequency,
            mean: 3.0,
            sigma: 1.0,
        };
        let chain = sample_chain(&template, &spec, 9, 0);
        for (a, b) in chain.atoms.iter().zip(&template.atoms) {
            assert_eq!(a.omega2, a.omega3);
            assert_eq!(a.position, b.position);
            assert_ne!(a.omega2, b.omega2);
        }
    }

    #[test]
    fn shifted_mean_of_constant() {
        let (m, s) = mean_stderr(&[0.1 + 0.2; 1000]);
        assert_eq!(m, 0.1 + 0.2);
        assert_eq!(s, 0.0);
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chiral_position_disorder_is_invisible() {
        let template = ChainConfig::periodic(chiral_atom(), 10, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Position,
            mean: 0.5,
            sigma: 2.0,
        };
        let wg = WaveguideParams::chiral();
        let stats = run_ensemble(&template, &spec, 1.07, &wg, 200, 5).unwrap();
        assert_eq!(stats.stderr_t, 0.0);
        assert_eq!(stats.mean_t, chain_transmission(1.07, &template).unwrap());
    }

    #[test]
    fn chiral_frequency_disorder_matches_quadrature() {
        let template = ChainConfig::periodic(chiral_atom(), 10, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Frequency,
            mean: 0.0,
            sigma: 0.5,
        };
        let stats =
            run_ensemble(&template, &spec, 1.0, &WaveguideParams::chiral(), 20_000, 1).unwrap();
        let expect = avg_chain_transmission(10, avg_tau_sq(0.0, 0.5, 0.2, 1.0, 1.0).unwrap());
        assert!((stats.mean_t - expect).abs() < 4.0 * stats.stderr_t);
        assert_eq!(stats.excluded, 0);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let template = ChainConfig::periodic(AtomParams::new(1.0, 0.2, 0.0, 0.1, 0.1), 30, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Position,
            mean: 0.5,
            sigma: 0.3,
        };
        let wg = WaveguideParams::symmetric();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ensemble(&template, &spec, 1.5, &wg, 500, 77).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn lossless_flat_fit_is_degenerate() {
        let template = ChainConfig::periodic(AtomParams::new(1.0, 0.2, 0.0, 1.0, 0.0), 1, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Frequency,
            mean: 0.0,
            sigma: 0.0,
        };
        let err = xi_from_slope(
            &template,
            &spec,
            1.3,
            &WaveguideParams::chiral(),
            &[5, 10, 20, 40],
            4,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateFit { .. }));
    }

    #[test]
    fn short_n_list_is_rejected() {
        let template = ChainConfig::periodic(chiral_atom(), 1, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Frequency,
            mean: 0.0,
            sigma: 1.0,
        };
        assert!(xi_from_slope(
            &template,
            &spec,
            1.0,
            &WaveguideParams::chiral(),
            &[5, 10, 20],
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn fit_of_exact_line() {
        let (a, b, r2) = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, -3.0, -5.0]);
        assert!((a - 3.0).abs() < 1e-14 && (b + 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_few_realizations() {
        let template = ChainConfig::periodic(chiral_atom(), 3, 0.5);
        let spec = DisorderSpec {
            kind: DisorderKind::Frequency,
            mean: 0.0,
            sigma: 1.0,
        };
        assert!(run_ensemble(&template, &spec, 1.0, &WaveguideParams::chiral(), 1, 0).is_err());
    }
}
