//! Single-photon transport through chains of driven Λ-type atoms coupled to
//! chiral and bidirectional waveguides.
//!
//! Frequencies are in units of a reference frequency, lengths (positions,
//! lattice constant) in units of the wavelength λ, group velocities are
//! dimensionless with v_R = 1 by default.

pub mod bands;
pub mod bidirectional;
pub mod chiral;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod model;
pub mod quadrature;
pub mod transfer;

pub use bidirectional::{
    chain_scatter, direct_jump_solver, single_atom_closed_form, ScatterResult,
};
pub use chiral::{
    avg_chain_transmission, avg_tau_sq, chain_transmission, hop_factor, tau, xi_inverse_chiral,
};
pub use error::{Error, Result};
pub use model::{varpi, AtomParams, ChainConfig, WaveguideParams, WidthConvention};
pub use transfer::TransferMatrix;
