//! C ABI over the `eitchain` library.
//!
//! Conventions:
//! - every fallible call returns an [`EitStatus`] and writes results through
//!   out-pointers, which are left untouched on failure;
//! - the message for the most recent failure on the calling thread is
//!   available from [`eit_last_error_message`];
//! - chains are opaque handles created by `eit_chain_new` or
//!   `eit_chain_periodic` and released with `eit_chain_free`;
//! - widths follow the library's coupling convention.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use eitchain::bands::cos_kl_symmetric;
use eitchain::ensemble::{run_ensemble, DisorderKind, DisorderSpec};
use eitchain::{
    avg_tau_sq, chain_scatter, chain_transmission, xi_inverse_chiral, AtomParams, ChainConfig,
    Error, WaveguideParams,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidRegime = 3,
    DegeneratePole = 4,
    Singular = 5,
    QuadratureFailure = 6,
    DegenerateFit = 7,
    Panic = 8,
}

/// How disorder perturbs each realization.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EitDisorderKind {
    /// Gaussian positions around the lattice sites; `mean` is the lattice constant.
    Position = 0,
    /// Gaussian shift of every atom's transition frequencies.
    Frequency = 1,
}

/// One driven Λ-type atom.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitAtom {
    pub omega2: f64,
    pub omega3: f64,
    pub rabi: f64,
    pub gamma2: f64,
    pub gamma_r: f64,
    pub gamma_l: f64,
    /// In units of the wavelength.
    pub position: f64,
}

/// Waveguide dispersion; `v_l = 0` selects a chiral waveguide.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitWaveguide {
    pub v_r: f64,
    pub v_l: f64,
    pub omega0: f64,
    pub wavelength: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EitScatter {
    pub transmission: f64,
    pub reflection: f64,
    /// Finite even when the transmission underflows.
    pub ln_transmission: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EitEnsembleStats {
    pub realizations: usize,
    pub mean_t: f64,
    pub stderr_t: f64,
    pub mean_ln_t: f64,
    pub stderr_ln_t: f64,
    pub xi_fixed_n: f64,
    pub excluded: usize,
    pub underflows: usize,
}

/// Opaque chain of atoms.
pub struct EitChain {
    inner: ChainConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn status_of(e: &Error) -> EitStatus {
    match e {
        Error::DegeneratePole { .. } | Error::PoleAtDressedState { .. } => {
            EitStatus::DegeneratePole
        }
        Error::QuadratureFailure { .. } => EitStatus::QuadratureFailure,
        Error::InvalidRegime(_) => EitStatus::InvalidRegime,
        Error::SingularElement(_) | Error::SingularSystem { .. } => EitStatus::Singular,
        Error::DegenerateFit { .. } => EitStatus::DegenerateFit,
        Error::InvalidParameter(_) => EitStatus::InvalidParameter,
    }
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (EitStatus, String)>) -> EitStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => EitStatus::Ok,
        Ok(Err((status, message))) => {
            remember(message);
            status
        }
        Err(_) => {
            remember("internal panic".into());
            EitStatus::Panic
        }
    }
}

fn lib<T>(r: eitchain::Result<T>) -> Result<T, (EitStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EitStatus, String) {
    (EitStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or valid for reads.
unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, (EitStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or valid for writes.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), (EitStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

impl From<EitAtom> for AtomParams {
    fn from(a: EitAtom) -> Self {
        AtomParams {
            omega2: a.omega2,
            omega3: a.omega3,
            rabi: a.rabi,
            gamma2: a.gamma2,
            gamma_r: a.gamma_r,
            gamma_l: a.gamma_l,
            position: a.position,
        }
    }
}

impl From<EitWaveguide> for WaveguideParams {
    fn from(w: EitWaveguide) -> Self {
        WaveguideParams {
            v_r: w.v_r,
            v_l: w.v_l,
            omega0: w.omega0,
            wavelength: w.wavelength,
        }
    }
}

impl From<WaveguideParams> for EitWaveguide {
    fn from(w: WaveguideParams) -> Self {
        EitWaveguide {
            v_r: w.v_r,
            v_l: w.v_l,
            omega0: w.omega0,
            wavelength: w.wavelength,
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Symmetric waveguide with v_R = v_L = 1 and λ = 2π.
#[no_mangle]
pub extern "C" fn eit_waveguide_symmetric() -> EitWaveguide {
    WaveguideParams::symmetric().into()
}

/// Chiral waveguide with v_R = 1 and λ = 2π.
#[no_mangle]
pub extern "C" fn eit_waveguide_chiral() -> EitWaveguide {
    WaveguideParams::chiral().into()
}

/// Empty chain with mean spacing `lattice_constant` (units of λ).
///
/// # Safety
/// `out` must be valid for writes. The handle written there must be released
/// with [`eit_chain_free`].
#[no_mangle]
pub unsafe extern "C" fn eit_chain_new(
    lattice_constant: f64,
    out: *mut *mut EitChain,
) -> EitStatus {
    guard(|| {
        if !(lattice_constant.is_finite() && lattice_constant > 0.0) {
            return Err((
                EitStatus::InvalidParameter,
                format!("lattice constant must be positive, got {lattice_constant}"),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let chain = Box::new(EitChain {
            inner: ChainConfig {
                atoms: Vec::new(),
                lattice_constant,
            },
        });
        write(out, Box::into_raw(chain), "out")
    })
}

/// `n` copies of `atom` at positions j·L, j = 1..=n.
///
/// # Safety
/// `atom` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_chain_periodic(
    atom: *const EitAtom,
    n: usize,
    lattice_constant: f64,
    out: *mut *mut EitChain,
) -> EitStatus {
    guard(|| {
        let atom: AtomParams = (*read(atom, "atom")?).into();
        lib(atom.validate())?;
        if !(lattice_constant.is_finite() && lattice_constant > 0.0) {
            return Err((
                EitStatus::InvalidParameter,
                format!("lattice constant must be positive, got {lattice_constant}"),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let chain = Box::new(EitChain {
            inner: ChainConfig::periodic(atom, n, lattice_constant),
        });
        write(out, Box::into_raw(chain), "out")
    })
}

/// Releases a chain. Null is ignored.
///
/// # Safety
/// `chain` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn eit_chain_free(chain: *mut EitChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Appends an atom; positions must stay strictly increasing.
///
/// # Safety
/// `chain` must be a live handle and `atom` valid for reads.
#[no_mangle]
pub unsafe extern "C" fn eit_chain_push_atom(
    chain: *mut EitChain,
    atom: *const EitAtom,
) -> EitStatus {
    guard(|| {
        let chain = chain.as_mut().ok_or_else(|| null("chain"))?;
        let atom: AtomParams = (*read(atom, "atom")?).into();
        lib(atom.validate())?;
        if let Some(last) = chain.inner.atoms.last() {
            if atom.position <= last.position {
                return Err((
                    EitStatus::InvalidParameter,
                    format!(
                        "atom position {} does not follow the previous atom at {}",
                        atom.position, last.position
                    ),
                ));
            }
        }
        chain.inner.atoms.push(atom);
        Ok(())
    })
}

/// Number of atoms, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eit_chain_len(chain: *const EitChain) -> usize {
    chain.as_ref().map_or(0, |c| c.inner.len())
}

/// Transmission of a chain in a chiral waveguide.
///
/// # Safety
/// `chain` must be a live handle and `transmission` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_chiral_transmission(
    chain: *const EitChain,
    omega: f64,
    transmission: *mut f64,
) -> EitStatus {
    guard(|| {
        let chain = read(chain, "chain")?;
        let t = lib(chain_transmission(omega, &chain.inner))?;
        write(transmission, t, "transmission")
    })
}

/// Transmission and reflection of a chain in a bidirectional waveguide.
///
/// # Safety
/// `chain` and `waveguide` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_chain_scatter(
    chain: *const EitChain,
    waveguide: *const EitWaveguide,
    omega: f64,
    out: *mut EitScatter,
) -> EitStatus {
    guard(|| {
        let chain = read(chain, "chain")?;
        let wg: WaveguideParams = (*read(waveguide, "waveguide")?).into();
        let s = lib(chain_scatter(omega, &chain.inner, &wg))?;
        write(
            out,
            EitScatter {
                transmission: s.transmission,
                reflection: s.reflection,
                ln_transmission: s.ln_transmission,
            },
            "out",
        )
    })
}

/// Gaussian average of the single-atom chiral transmission.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_avg_tau_sq(
    mean_delta2: f64,
    sigma: f64,
    rabi: f64,
    gamma2: f64,
    gamma: f64,
    out: *mut f64,
) -> EitStatus {
    guard(|| {
        let v = lib(avg_tau_sq(mean_delta2, sigma, rabi, gamma2, gamma))?;
        write(out, v, "out")
    })
}

/// Inverse localization length of a chiral chain at critical coupling.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_xi_inverse(
    mean_delta2: f64,
    sigma: f64,
    rabi: f64,
    gamma2: f64,
    gamma: f64,
    out: *mut f64,
) -> EitStatus {
    guard(|| {
        let v = lib(xi_inverse_chiral(mean_delta2, sigma, rabi, gamma2, gamma))?;
        write(out, v, "out")
    })
}

/// cos(KL) of a lossless periodic chain in a symmetric waveguide.
///
/// # Safety
/// `atom` and `waveguide` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_cos_kl_symmetric(
    atom: *const EitAtom,
    waveguide: *const EitWaveguide,
    omega: f64,
    lattice_constant: f64,
    out: *mut f64,
) -> EitStatus {
    guard(|| {
        let atom: AtomParams = (*read(atom, "atom")?).into();
        let wg: WaveguideParams = (*read(waveguide, "waveguide")?).into();
        let v = lib(cos_kl_symmetric(omega, &atom, &wg, lattice_constant))?;
        write(out, v, "out")
    })
}

/// Disorder ensemble around `chain`. Results depend only on the inputs and
/// `seed`, not on the number of worker threads.
///
/// # Safety
/// `chain` and `waveguide` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_run_ensemble(
    chain: *const EitChain,
    waveguide: *const EitWaveguide,
    kind: EitDisorderKind,
    mean: f64,
    sigma: f64,
    omega: f64,
    realizations: usize,
    seed: u64,
    out: *mut EitEnsembleStats,
) -> EitStatus {
    guard(|| {
        let chain = read(chain, "chain")?;
        let wg: WaveguideParams = (*read(waveguide, "waveguide")?).into();
        let spec = DisorderSpec {
            kind: match kind {
                EitDisorderKind::Position => DisorderKind::Position,
                EitDisorderKind::Frequency => DisorderKind::Frequency,
            },
            mean,
            sigma,
        };
        let s = lib(run_ensemble(
            &chain.inner,
            &spec,
            omega,
            &wg,
            realizations,
            seed,
        ))?;
        write(
            out,
            EitEnsembleStats {
                realizations: s.realizations,
                mean_t: s.mean_t,
                stderr_t: s.stderr_t,
                mean_ln_t: s.mean_ln_t,
                stderr_ln_t: s.stderr_ln_t,
                xi_fixed_n: s.xi_fixed_n,
                excluded: s.excluded,
                underflows: s.underflows,
            },
            "out",
        )
    })
}
