//! Hamiltonian-to-Hamiltonian compiler built from perturbative gadgets, with an
//! exact-diagonalization certifier for every simulation step.
//!
//! The crate is organised bottom-up: [`hamcore`] holds the operator algebra and the
//! eigensolver, [`encodings`] the maps M ↦ V(M ⊗ P + M̄ ⊗ Q)V†, [`gadgets`] the
//! perturbative constructions, [`simcheck`] the (Δ, η, ε) certification and the derived
//! bounds, and [`pipeline`] the pass manager that chains gadgets into a compilation.

pub mod config;
pub mod encodings;
pub mod error;
pub mod gadgets;
pub mod hamcore;
pub mod pipeline;
pub mod simcheck;

pub use config::Config;
pub use encodings::Encoding;
pub use error::{Error, Result};
pub use hamcore::{Hamiltonian, LocalTerm, Mat, Pauli, PauliTerm, Spectrum, Term, C64};
pub use simcheck::SimulationReport;
