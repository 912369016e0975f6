//! Exact-statevector laboratory for preparing ground states of periodic
//! quantum Ising chains with alternating-operator circuits, and for relating
//! preparation quality to the interaction distance of the target state.
//!
//! The main pieces:
//!
//! - [`models`]: Pauli-string Hamiltonians and dense exact diagonalization.
//! - [`simulator`]: state vectors and exact layer unitaries exp(−iθH).
//! - [`qaoa`]: protocols, angle schedules and cost functions.
//! - [`optimize`]: basinhopping, depth-sequential seeding, grid refinement,
//!   total-time-constrained optimization.
//! - [`spectra`]: entanglement spectra, entropy and interaction distance.
//! - [`experiments`]: phase-diagram sweeps, correlations, landscape probes
//!   and their persisted artifacts.
//! - [`config`] and [`cli`]: run configuration and the `qaoalab` frontend.
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod models;
pub mod optimize;
pub mod qaoa;
pub mod simulator;
pub mod spectra;

pub use error::{Error, Result};

/// Derives an independent 64-bit seed from a master seed and a path of
/// indices (splitmix64 mixing).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}
