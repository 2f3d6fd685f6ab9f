//! The energy-equivalence check and the Gaussian shape of the Q density.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    classical_hamiltonian_poly, coherent_vector_from_alphas, field_to_amplitudes, project,
    ClassicalEnsemble, ModeBasis,
};
use crate::error::{Error, Result};
use crate::field::{classical_energy, FieldModel, FieldState};

/// Both sides of the energy identity and their discrepancy.
#[derive(Debug, Clone)]
pub struct EnergyEquivalenceReport {
    /// Fock side: ensemble average of `<v(S)| H_n |v(S)>`.
    pub lhs: f64,
    /// Classical side: ensemble average of `H(S)` on the projected states.
    pub rhs: f64,
    pub abs_err: f64,
    /// `abs_err / |rhs|`, or `abs_err` itself when `|rhs| < 1e-12`.
    pub rel_err: f64,
    /// Largest coherent truncation tail over the evaluated states.
    pub max_truncation_tail: f64,
}

/// Test `Tr(rho H_n) = <H(S)>` on an ensemble.
///
/// Finite weighted ensembles are evaluated exactly as
/// `sum_k w_k <v(S_k)|H_n|v(S_k)>`; generative ensembles draw `samples`
/// states and evaluate both sides on the same draws, so the reported error
/// reflects the identity rather than Monte Carlo noise. The classical side
/// uses the projection of each state onto the basis's selected subspace
/// (a no-op for in-subspace states), matching the operator content of
/// `H_n`. The Fock side is computed by truncated state-vector algebra, not
/// from any coherent-expectation closed form.
pub fn check_energy_equivalence(
    ensemble: &ClassicalEnsemble,
    model: &FieldModel,
    basis: &ModeBasis,
    samples: usize,
) -> Result<EnergyEquivalenceReport> {
    let poly = classical_hamiltonian_poly(model, basis)?;
    let fock = basis.fock();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut max_tail = 0.0_f64;

    let mut eval = |state: &FieldState, weight: f64| -> Result<()> {
        let amps = field_to_amplitudes(state, basis)?;
        let v = coherent_vector_from_alphas(&amps.alpha, fock)?;
        max_tail = max_tail.max(v.truncation_tail());
        lhs += weight * poly.expectation(fock, v.entries())?.re;
        let projected = project(state, basis)?;
        rhs += weight * classical_energy(&projected, model)?;
        Ok(())
    };

    match ensemble {
        ClassicalEnsemble::Weighted(members) => {
            for (state, weight) in members {
                eval(state, *weight)?;
            }
        }
        ClassicalEnsemble::Gaussian { .. } => {
            if samples == 0 {
                return Err(Error::InvalidParameter(
                    "generative ensembles need samples >= 1".into(),
                ));
            }
            let states = ensemble.draw_states(basis, samples)?;
            let w = 1.0 / samples as f64;
            for state in &states {
                eval(state, w)?;
            }
        }
    }

    let abs_err = (lhs - rhs).abs();
    let rel_err = if rhs.abs() > 1e-12 {
        abs_err / rhs.abs()
    } else {
        abs_err
    };
    Ok(EnergyEquivalenceReport {
        lhs,
        rhs,
        abs_err,
        rel_err,
        max_truncation_tail: max_tail,
    })
}

/// Outcome of probing the Q density of a coherent state against its
/// predicted Gaussian form.
#[derive(Debug, Clone)]
pub struct QGaussianReport {
    pub max_rel_dev: f64,
    pub probes: usize,
}

/// With `rho = |v(S0)><v(S0)|`, the Q density at a probe state `S` is
/// predicted to be `exp(-sum_s |alpha_s(S) - alpha_s(S0)|^2)`: the
/// unit-variance Gaussian in the scaled amplitude coordinates (equivalently
/// `exp(-|d theta|^2/2 - |d tau|^2/2)` in unscaled ones). Probes are drawn
/// around the base with per-quadrature spread `spread`; probe 0 is the base
/// itself. Reports the worst relative deviation of measured vs predicted.
pub fn q_gaussian_check(
    base: &FieldState,
    basis: &ModeBasis,
    probes: usize,
    spread: f64,
    seed: u64,
) -> Result<QGaussianReport> {
    if probes == 0 {
        return Err(Error::InvalidParameter("probes must be >= 1".into()));
    }
    let fock = basis.fock();
    let base_alpha = field_to_amplitudes(base, basis)?.alpha;
    let base_vec = coherent_vector_from_alphas(&base_alpha, fock)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel_dev = 0.0_f64;
    for probe in 0..probes {
        let alpha: Vec<Complex64> = if probe == 0 {
            base_alpha.clone()
        } else {
            base_alpha
                .iter()
                .map(|a0| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    a0 + Complex64::new(spread * re, spread * im)
                })
                .collect()
        };
        let probe_vec = coherent_vector_from_alphas(&alpha, fock)?;
        let measured = probe_vec.entries().dotc(base_vec.entries()).norm_sqr();
        let dist2: f64 = alpha
            .iter()
            .zip(base_alpha.iter())
            .map(|(a, a0)| (a - a0).norm_sqr())
            .sum();
        let predicted = (-dist2).exp();
        let rel = ((measured - predicted) / predicted).abs();
        max_rel_dev = max_rel_dev.max(rel);
    }
    Ok(QGaussianReport {
        max_rel_dev,
        probes,
    })
}
