//! Numerical laboratory for the classical-field / bosonic-quantum
//! correspondence on periodic lattices.
//!
//! The crate connects three layers:
//!
//! * [`field`]: classical lattice field theory in 1+1 dimensions: energy
//!   functionals, symplectic integration, and time-symmetric white-noise
//!   sources.
//! * [`fock`]: truncated multimode bosonic Fock spaces: ladder operators,
//!   normal/anti-normal ordered polynomials, density matrices, exact
//!   diagonalization.
//! * [`maps`]: the coherent-state bridge between the two: mode transforms,
//!   Q probabilities, P reconstruction, the energy-equivalence check, and
//!   the coherent-reachability energy gap.
//!
//! [`mrf`] adds finite-state space-time lattice statistics (forward Markov
//! processes vs. Markov random fields with two-time boundaries), and [`lab`]
//! packages everything into named, reproducible experiments.

pub mod error;
pub mod field;
pub mod fock;
pub mod lab;
pub mod maps;
pub mod mrf;

pub use error::{Error, Result};
