//! Multimode parametric oscillator model: Hermite-Gauss mode couplings, supermode
//! decomposition, mean-field operating points, quadrature-noise spectra, stochastic
//! homodyne simulation, quasi-phase-matching and phase locking.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod hg_modes;
pub mod locking;
pub mod phasematch;
pub mod psd;
pub mod quadrature;
pub mod scenario;
pub mod sde;

pub use error::{Error, Result};
