//! Quasiparticle generation in superconductors by continuous spontaneous
//! localization (CSL) noise, and its consequences for transmon qubits.
//!
//! The crate is organised bottom-up:
//!
//! * [`materials`]: constants, material records, collapse parameters and scales
//! * [`bcs`]: density of states, coherence factors, thermal occupations
//! * [`quadrature`]: Gauss-Legendre rules and gap-edge integrals
//! * [`csl_rates`]: collapse-noise generation and reduction rates
//! * [`phonon_kernels`]: electron-phonon kernels, rates and crossover search
//! * [`kinetic`]: energy grid, kinetic equation, analytic and numeric steady states
//! * [`observables`]: quasiparticle density, qubit relaxation, subgap current, gate budgets

pub mod bcs;
pub mod csl_rates;
pub mod error;
pub mod kinetic;
pub mod materials;
pub mod observables;
pub mod phonon_kernels;
pub mod quadrature;

pub use error::{Error, Result};

use sha2::{Digest, Sha256};

/// Short stable hash of a list of numbers, used to key cached curves.
pub fn fingerprint(values: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_bits().to_le_bytes());
    }
    hex::encode(&hasher.finalize()[..8])
}
