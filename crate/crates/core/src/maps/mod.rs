//! Coherent-state mappings between classical lattice fields and truncated
//! Fock spaces.
//!
//! A [`ModeBasis`] selects lattice momenta (per field component) and binds
//! them to Fock modes. For a selected mode with frequency `w` the scaled
//! amplitudes of a state are
//!
//! ```text
//!   theta(p) = sqrt(w(p)) * ft(phi)(p)      tau(p) = ft(pi)(p) / sqrt(w(p))
//!   alpha(p) = (theta(p) + i tau(p)) / sqrt(2)
//! ```
//!
//! with the unitary lattice transform `ft(f)(p) = a/sqrt(L a) * sum_y
//! e^{-i p y} f(y)`, so Parseval holds exactly. Frequencies use the lattice
//! dispersion `w(p)^2 = m^2 + (4/a^2) sin^2(p a / 2)`: the forward-
//! difference counterpart of `sqrt(m^2 + p^2)`, which it approaches as
//! `a -> 0`; with this choice the free-field energy identity between the
//! classical lattice sum and the Fock expectation is exact, not merely
//! `O(a^2)` accurate.
//!
//! Selections must be closed under momentum conjugation `k -> L - k` so the
//! selected subspace is a real subspace of field space; reconstruction from
//! amplitudes then always yields real fields.

mod coherent;
mod equivalence;
mod gap;
mod hamiltonian;
mod reconstruct;

pub use coherent::{
    coherent_vector, coherent_vector_from_alphas, husimi_from_alphas, q_probability,
    CoherentVector,
};
pub use equivalence::{
    check_energy_equivalence, q_gaussian_check, EnergyEquivalenceReport, QGaussianReport,
};
pub use gap::{reachability_gap, ReachabilityReport};
pub use hamiltonian::{
    anti_normal_ordered_hamiltonian, classical_hamiltonian_poly, normal_ordered_hamiltonian,
};
pub use reconstruct::{p_reconstruct, ClassicalEnsemble, Reconstruction};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldModel, FieldState, LatticeSpec};
use crate::fock::FockSpec;

/// One selected `(component, momentum index)` pair bound to a Fock mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedMode {
    pub component: usize,
    /// Momentum index `k` in `0..L`, momentum `p_k = 2 pi k / (L a)`.
    pub k: usize,
    /// Lattice dispersion frequency `w > 0`.
    pub frequency: f64,
}

/// Momentum-mode basis: the selected `(component, k)` pairs, their
/// frequencies, and the Fock-space binding.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    lattice: LatticeSpec,
    masses: Vec<f64>,
    modes: Vec<SelectedMode>,
    /// Index of each mode's conjugate partner (`k -> (L - k) % L`).
    conjugate: Vec<usize>,
    fock: FockSpec,
}

impl ModeBasis {
    /// Build a basis over `selection`, binding mode `i` of the Fock space to
    /// `selection[i]`. The selection must be non-empty, injective, and
    /// conjugate-closed; every selected mode must have strictly positive
    /// frequency (a massless zero mode cannot be scaled).
    pub fn new(model: &FieldModel, selection: &[(usize, usize)], n_max: usize) -> Result<Self> {
        if selection.is_empty() {
            return Err(Error::InvalidParameter("empty mode selection".into()));
        }
        let l = model.lattice.sites;
        let mut modes = Vec::with_capacity(selection.len());
        for &(component, k) in selection {
            if component >= model.components() {
                return Err(Error::ModeOutOfRange {
                    mode: component,
                    modes: model.components(),
                });
            }
            if k >= l {
                return Err(Error::ModeOutOfRange { mode: k, modes: l });
            }
            let frequency = lattice_frequency(&model.lattice, model.masses[component], k);
            if frequency <= 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "mode (component {component}, k {k}) has zero frequency; \
                     massless zero modes cannot be selected"
                )));
            }
            modes.push(SelectedMode {
                component,
                k,
                frequency,
            });
        }
        let mut conjugate = Vec::with_capacity(modes.len());
        for (i, mode) in modes.iter().enumerate() {
            let kc = (l - mode.k % l) % l;
            let partner = modes
                .iter()
                .position(|m| m.component == mode.component && m.k == kc)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "selection not conjugate-closed: (component {}, k {}) selected \
                         without (component {}, k {})",
                        mode.component, mode.k, mode.component, kc
                    ))
                })?;
            conjugate.push(partner);
            for other in &modes[..i] {
                if other.component == mode.component && other.k == mode.k {
                    return Err(Error::InvalidParameter(
                        "selection contains a duplicate mode".into(),
                    ));
                }
            }
        }
        let fock = FockSpec::new(modes.len(), n_max)?;
        Ok(Self {
            lattice: model.lattice,
            masses: model.masses.clone(),
            modes,
            conjugate,
            fock,
        })
    }

    /// All `N * L` momenta of every component (small lattices only).
    pub fn full(model: &FieldModel, n_max: usize) -> Result<Self> {
        let mut selection = Vec::new();
        for j in 0..model.components() {
            for k in 0..model.lattice.sites {
                selection.push((j, k));
            }
        }
        Self::new(model, &selection, n_max)
    }

    /// The `count` lowest-|p| momenta of every component, in the
    /// conjugate-closed order `k = 0, 1, L-1, 2, L-2, ...`. `count` must
    /// land on a closure boundary (1, 3, 5, ...), otherwise the selection
    /// would split a +-p pair.
    pub fn low_momentum(model: &FieldModel, count: usize, n_max: usize) -> Result<Self> {
        let l = model.lattice.sites;
        let mut order = vec![0usize];
        let mut k = 1;
        while order.len() < l {
            order.push(k);
            let kc = l - k;
            if kc != k && kc != 0 {
                order.push(kc);
            }
            k += 1;
        }
        if count > l {
            return Err(Error::ModeOutOfRange { mode: count, modes: l });
        }
        let chosen = &order[..count];
        for &k in chosen {
            let kc = (l - k % l) % l;
            if !chosen.contains(&kc) {
                return Err(Error::InvalidParameter(format!(
                    "count {count} splits the +-p pair (k={k}, k={kc}); \
                     use a conjugate-closed count"
                )));
            }
        }
        let mut selection = Vec::new();
        for j in 0..model.components() {
            for &k in chosen {
                selection.push((j, k));
            }
        }
        Self::new(model, &selection, n_max)
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn modes(&self) -> &[SelectedMode] {
        &self.modes
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn fock(&self) -> &FockSpec {
        &self.fock
    }

    pub fn conjugate_index(&self, mode: usize) -> usize {
        self.conjugate[mode]
    }

    fn components(&self) -> usize {
        self.masses.len()
    }

    pub(crate) fn check_state(&self, state: &FieldState) -> Result<()> {
        if state.components() != self.components() {
            return Err(Error::DimensionMismatch {
                expected: self.components(),
                actual: state.components(),
            });
        }
        if state.sites() != self.lattice.sites {
            return Err(Error::DimensionMismatch {
                expected: self.lattice.sites,
                actual: state.sites(),
            });
        }
        Ok(())
    }
}

/// Lattice dispersion `sqrt(m^2 + (4/a^2) sin^2(pi k / L))`.
pub fn lattice_frequency(lattice: &LatticeSpec, mass: f64, k: usize) -> f64 {
    let s = (std::f64::consts::PI * k as f64 / lattice.sites as f64).sin();
    (mass * mass + 4.0 / (lattice.spacing * lattice.spacing) * s * s).sqrt()
}

/// Scaled mode amplitudes of a state; entry `i` belongs to mode `i` of the
/// basis that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub theta: Vec<Complex64>,
    pub tau: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
}

impl ModeAmplitudes {
    /// Rebuild `(theta, tau)` from free coherent amplitudes, with every
    /// unselected mode implicitly zero. Any complex `alpha` vector is valid;
    /// the reality condition is satisfied by construction.
    pub fn from_alphas(basis: &ModeBasis, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != basis.num_modes() {
            return Err(Error::DimensionMismatch {
                expected: basis.num_modes(),
                actual: alpha.len(),
            });
        }
        let sqrt2 = 2.0_f64.sqrt();
        let mut theta = Vec::with_capacity(alpha.len());
        let mut tau = Vec::with_capacity(alpha.len());
        for (i, &a) in alpha.iter().enumerate() {
            let ac = alpha[basis.conjugate_index(i)].conj();
            theta.push((a + ac) / sqrt2);
            tau.push((a - ac) * Complex64::new(0.0, -1.0) / sqrt2);
        }
        Ok(Self { theta, tau, alpha })
    }
}

/// Forward map: state -> scaled amplitudes on the selected modes.
pub fn field_to_amplitudes(state: &FieldState, basis: &ModeBasis) -> Result<ModeAmplitudes> {
    basis.check_state(state)?;
    let l = basis.lattice.sites;
    let norm = basis.lattice.spacing / basis.lattice.length().sqrt();
    let mut theta = Vec::with_capacity(basis.num_modes());
    let mut tau = Vec::with_capacity(basis.num_modes());
    let mut alpha = Vec::with_capacity(basis.num_modes());
    for mode in &basis.modes {
        let mut phi_hat = Complex64::new(0.0, 0.0);
        let mut pi_hat = Complex64::new(0.0, 0.0);
        for n in 0..l {
            let phase = -2.0 * std::f64::consts::PI * (mode.k * n % l) as f64 / l as f64;
            let e = Complex64::from_polar(1.0, phase);
            phi_hat += e * state.phi[mode.component][n];
            pi_hat += e * state.pi[mode.component][n];
        }
        phi_hat *= norm;
        pi_hat *= norm;
        let th = phi_hat * mode.frequency.sqrt();
        let ta = pi_hat / mode.frequency.sqrt();
        theta.push(th);
        tau.push(ta);
        alpha.push((th + Complex64::new(0.0, 1.0) * ta) / 2.0_f64.sqrt());
    }
    Ok(ModeAmplitudes { theta, tau, alpha })
}

/// Inverse map: amplitudes -> real field state, with unselected modes zero.
///
/// Rejects inputs that violate the conjugate-reality condition
/// `theta(-p) = conj(theta(p))` (same for `tau`) beyond `1e-8` relative to
/// the amplitude scale; accepted inputs are conjugate-symmetrized before
/// inversion.
pub fn amplitudes_to_field(amps: &ModeAmplitudes, basis: &ModeBasis) -> Result<FieldState> {
    let m = basis.num_modes();
    if amps.theta.len() != m || amps.tau.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: amps.theta.len(),
        });
    }
    let scale = amps
        .theta
        .iter()
        .chain(amps.tau.iter())
        .map(|z| z.norm())
        .fold(1.0_f64, f64::max);
    let tol = 1e-8 * scale;
    let mut theta = amps.theta.clone();
    let mut tau = amps.tau.clone();
    for i in 0..m {
        let c = basis.conjugate_index(i);
        let dev = (theta[i] - theta[c].conj())
            .norm()
            .max((tau[i] - tau[c].conj()).norm());
        if dev > 2.0 * tol {
            return Err(Error::RealityViolation(format!(
                "mode {i} deviates from its conjugate partner by {dev:.3e}"
            )));
        }
        let sym_theta = 0.5 * (theta[i] + theta[c].conj());
        let sym_tau = 0.5 * (tau[i] + tau[c].conj());
        theta[i] = sym_theta;
        theta[c] = sym_theta.conj();
        tau[i] = sym_tau;
        tau[c] = sym_tau.conj();
    }

    let l = basis.lattice.sites;
    let inv_norm = 1.0 / basis.lattice.length().sqrt();
    let mut state = FieldState::zeros(basis.components(), l);
    for (i, mode) in basis.modes.iter().enumerate() {
        let phi_hat = theta[i] / mode.frequency.sqrt();
        let pi_hat = tau[i] * mode.frequency.sqrt();
        for n in 0..l {
            let phase = 2.0 * std::f64::consts::PI * (mode.k * n % l) as f64 / l as f64;
            let e = Complex64::from_polar(1.0, phase);
            state.phi[mode.component][n] += (e * phi_hat).re * inv_norm;
            state.pi[mode.component][n] += (e * pi_hat).re * inv_norm;
        }
    }
    Ok(state)
}

/// Project a state onto the basis's selected subspace (round-trip through
/// the amplitude coordinates). Identity for states already in the subspace.
pub fn project(state: &FieldState, basis: &ModeBasis) -> Result<FieldState> {
    amplitudes_to_field(&field_to_amplitudes(state, basis)?, basis)
}
