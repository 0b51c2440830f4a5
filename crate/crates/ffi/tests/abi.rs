use std::ffi::CStr;
use std::ptr;

use eitchain_ffi::*;

fn atom(gamma_l: f64) -> EitAtom {
    EitAtom {
        omega2: 1.0,
        omega3: 1.0,
        rabi: 0.2,
        gamma2: 0.1,
        gamma_r: 0.1,
        gamma_l,
        position: 0.0,
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(eit_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(eit_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn chiral_chain_round_trip() {
    let mut chain = ptr::null_mut();
    unsafe {
        assert_eq!(
            eit_chain_periodic(&atom(0.0), 10, 0.5, &mut chain),
            EitStatus::Ok
        );
        assert_eq!(eit_chain_len(chain), 10);
        let mut t = -1.0;
        assert_eq!(eit_chiral_transmission(chain, 1.0, &mut t), EitStatus::Ok);
        assert!((t - 1.0).abs() < 1e-12);
        eit_chain_free(chain);
    }
}

#[test]
fn push_atoms_and_scatter() {
    let mut chain = ptr::null_mut();
    unsafe {
        assert_eq!(eit_chain_new(0.5, &mut chain), EitStatus::Ok);
        for j in 1..=3 {
            let a = EitAtom {
                position: 0.5 * j as f64,
                ..atom(0.1)
            };
            assert_eq!(eit_chain_push_atom(chain, &a), EitStatus::Ok);
        }
        let behind = EitAtom {
            position: 0.1,
            ..atom(0.1)
        };
        assert_eq!(
            eit_chain_push_atom(chain, &behind),
            EitStatus::InvalidParameter
        );
        assert!(last_error().contains("does not follow"));

        let wg = eit_waveguide_symmetric();
        let mut out = EitScatter::default();
        assert_eq!(eit_chain_scatter(chain, &wg, 1.0, &mut out), EitStatus::Ok);
        assert!((out.transmission - 1.0).abs() < 1e-12);
        assert!(out.reflection < 1e-24);

        // a chiral waveguide is the wrong regime for the bidirectional solver
        let chiral = eit_waveguide_chiral();
        assert_eq!(
            eit_chain_scatter(chain, &chiral, 1.0, &mut out),
            EitStatus::InvalidRegime
        );
        eit_chain_free(chain);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut t = 0.0;
        assert_eq!(
            eit_chiral_transmission(ptr::null(), 1.0, &mut t),
            EitStatus::NullPointer
        );
        assert!(last_error().contains("chain"));
        assert_eq!(
            eit_avg_tau_sq(0.0, 0.5, 0.2, 1.0, 1.0, ptr::null_mut()),
            EitStatus::NullPointer
        );
        assert_eq!(eit_chain_new(0.5, ptr::null_mut()), EitStatus::NullPointer);
        eit_chain_free(ptr::null_mut());
        assert_eq!(eit_chain_len(ptr::null()), 0);
    }
}

#[test]
fn closed_forms() {
    unsafe {
        let mut avg = 0.0;
        assert_eq!(
            eit_avg_tau_sq(0.0, 0.0, 0.2, 1.0, 1.0, &mut avg),
            EitStatus::Ok
        );
        assert_eq!(avg, 1.0);
        let mut xi_inv = 0.0;
        assert_eq!(
            eit_xi_inverse(0.0, 0.5, 0.2, 1.0, 1.0, &mut xi_inv),
            EitStatus::Ok
        );
        assert!(xi_inv > 0.0);
        assert_eq!(
            eit_xi_inverse(0.0, 0.5, 0.2, 0.5, 1.0, &mut xi_inv),
            EitStatus::InvalidRegime
        );

        let lossless = EitAtom {
            gamma2: 0.0,
            ..atom(0.1)
        };
        let wg = eit_waveguide_symmetric();
        let mut c = 0.0;
        assert_eq!(
            eit_cos_kl_symmetric(&lossless, &wg, 1.0, 0.5, &mut c),
            EitStatus::Ok
        );
        assert!(
            (c - (-1.0)).abs() < 1e-12,
            "free propagation over λ/2 at EIT: {c}"
        );
        assert_eq!(
            eit_cos_kl_symmetric(&lossless, &wg, 1.1, 0.5, &mut c),
            EitStatus::DegeneratePole
        );
    }
}

#[test]
fn ensemble_matches_library_and_is_repeatable() {
    let mut chain = ptr::null_mut();
    unsafe {
        let a = EitAtom {
            omega2: 100.0,
            omega3: 100.0,
            gamma2: 1.0,
            gamma_r: 1.0,
            ..atom(0.0)
        };
        assert_eq!(eit_chain_periodic(&a, 5, 0.5, &mut chain), EitStatus::Ok);
        let wg = eit_waveguide_chiral();
        let mut first = EitEnsembleStats::default();
        let mut second = EitEnsembleStats::default();
        for out in [&mut first, &mut second] {
            let status = eit_run_ensemble(
                chain,
                &wg,
                EitDisorderKind::Frequency,
                0.0,
                0.5,
                100.0,
                1000,
                42,
                out,
            );
            assert_eq!(status, EitStatus::Ok);
        }
        assert_eq!(first, second);
        assert_eq!(first.realizations, 1000);
        assert_eq!(first.excluded, 0);

        let mut bad = EitEnsembleStats::default();
        let status = eit_run_ensemble(
            chain,
            &wg,
            EitDisorderKind::Frequency,
            0.0,
            -1.0,
            100.0,
            10,
            1,
            &mut bad,
        );
        assert_eq!(status, EitStatus::InvalidParameter);
        assert_eq!(
            bad,
            EitEnsembleStats::default(),
            "out is untouched on failure"
        );
        eit_chain_free(chain);
    }
}
