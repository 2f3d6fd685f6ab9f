//! The coherent-reachability energy gap: how far the best coherent-ensemble
//! energy sits above the true quantum ground energy.
//!
//! For a linear functional, no mixture can beat the best pure coherent
//! state, so minimizing `<alpha| H_n |alpha>` over the complex amplitude
//! vector gives the exact minimum over every state reachable as a
//! nonnegative mixture of coherent projectors. Quadratic Hamiltonians close
//! the gap; interactions generically open it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::coherent_vector_from_alphas;
use crate::error::Result;
use crate::fock::{ground_state, FockSpec, OperatorMatrix};

#[derive(Debug, Clone)]
pub struct ReachabilityReport {
    /// Exact ground energy of `H_n` in the truncated space.
    pub e_quantum: f64,
    /// Minimum of `<alpha|H_n|alpha>` found by multi-start descent.
    pub e_coherent_min: f64,
    /// `e_coherent_min - e_quantum`; nonnegative up to solver tolerance.
    pub gap: f64,
    /// Whether any restart met the gradient tolerance.
    pub converged: bool,
    /// Argmin amplitudes.
    pub best_alpha: Vec<Complex64>,
}

const GRAD_TOL: f64 = 1e-9;
const FD_STEP: f64 = 1e-5;
const MAX_ITERS: usize = 400;

/// Compute the gap for a Hermitian `hn` over `fock`, using `restarts`
/// multi-start descents (the first start is always the origin).
pub fn reachability_gap(
    hn: &OperatorMatrix,
    fock: &FockSpec,
    restarts: usize,
    seed: u64,
) -> Result<ReachabilityReport> {
    let (e_quantum, _) = ground_state(hn)?;
    let m = fock.modes;

    let energy = |coords: &[f64]| -> f64 {
        let alphas: Vec<Complex64> = coords
            .chunks(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let v = coherent_vector_from_alphas(&alphas, fock).expect("coherent build");
        hn.quadratic_form(v.entries()).expect("dims checked").re
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_coords = vec![0.0; 2 * m];
    let mut best_energy = f64::INFINITY;
    let mut converged = false;
    for restart in 0..restarts.max(1) {
        let mut coords: Vec<f64> = if restart == 0 {
            vec![0.0; 2 * m]
        } else {
            (0..2 * m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let ok = descend(&energy, &mut coords);
        let e = energy(&coords);
        if e < best_energy {
            best_energy = e;
            best_coords = coords;
        }
        converged |= ok;
    }
    let best_alpha: Vec<Complex64> = best_coords
        .chunks(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    Ok(ReachabilityReport {
        e_quantum,
        e_coherent_min: best_energy,
        gap: best_energy - e_quantum,
        converged,
        best_alpha,
    })
}

/// Steepest descent with central finite differences and Armijo backtracking.
/// Returns whether the gradient tolerance was met.
fn descend(energy: &dyn Fn(&[f64]) -> f64, coords: &mut Vec<f64>) -> bool {
    let n = coords.len();
    let mut grad = vec![0.0; n];
    for _ in 0..MAX_ITERS {
        let e0 = energy(coords);
        let mut gnorm2 = 0.0;
        for i in 0..n {
            let saved = coords[i];
            coords[i] = saved + FD_STEP;
            let plus = energy(coords);
            coords[i] = saved - FD_STEP;
            let minus = energy(coords);
            coords[i] = saved;
            grad[i] = (plus - minus) / (2.0 * FD_STEP);
            gnorm2 += grad[i] * grad[i];
        }
        if gnorm2.sqrt() <= GRAD_TOL {
            return true;
        }
        // Backtracking line search along -grad.
        let mut step = 0.5;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = coords
                .iter()
                .zip(grad.iter())
                .map(|(x, g)| x - step * g)
                .collect();
            if energy(&trial) <= e0 - 1e-4 * step * gnorm2 {
                *coords = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent direction at finite-difference resolution.
            return gnorm2.sqrt() <= 1e2 * GRAD_TOL;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::NormalPoly;

    fn quartic_oscillator(n_max: usize, lambda: f64) -> (FockSpec, OperatorMatrix) {
        let fock = FockSpec::new(1, n_max).unwrap();
        let mut poly = NormalPoly::new(1);
        poly.add_number(0, 1.0);
        poly.add_normal_q_power(0, 4, lambda);
        (fock, poly.to_matrix(&fock).unwrap())
    }

    #[test]
    fn free_field_gap_is_zero() {
        let fock = FockSpec::new(1, 20).unwrap();
        let mut poly = NormalPoly::new(1);
        poly.add_number(0, 1.0);
        let h = poly.to_matrix(&fock).unwrap();
        let report = reachability_gap(&h, &fock, 4, 11).unwrap();
        assert!(report.e_quantum.abs() <= 1e-12);
        assert!(report.e_coherent_min.abs() <= 1e-9);
        assert!(report.gap.abs() <= 1e-9);
        assert!(report.converged);
    }

    #[test]
    fn quartic_oscillator_opens_a_positive_gap() {
        // <alpha| :q^4: |alpha> = (sqrt(2) Re alpha)^4 >= 0, so the coherent
        // minimum sits at alpha = 0 with energy exactly 0, while exact
        // diagonalization dips below zero.
        let (fock, h) = quartic_oscillator(30, 0.1);
        let report = reachability_gap(&h, &fock, 8, 3).unwrap();
        assert!(report.e_quantum < 0.0, "e_quantum {}", report.e_quantum);
        assert!(
            report.e_coherent_min.abs() <= 1e-9,
            "coherent min {}",
            report.e_coherent_min
        );
        assert!(report.gap > 0.0);
    }

    #[test]
    fn gap_invariant_under_identity_shift() {
        let (fock, h) = quartic_oscillator(24, 0.1);
        let report = reachability_gap(&h, &fock, 4, 9).unwrap();
        let shifted = reachability_gap(&h.shift(3.0), &fock, 4, 9).unwrap();
        assert!(
            (report.gap - shifted.gap).abs() <= 1e-9,
            "gap {} vs shifted {}",
            report.gap,
            shifted.gap
        );
    }
}
