//! Coherent vectors and the Q probability.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{field_to_amplitudes, ModeBasis};
use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::fock::{DensityMatrix, FockSpec};

/// Normalized multimode coherent state in a truncated Fock space.
///
/// Each mode carries the Poisson amplitude profile `alpha^n / sqrt(n!)`;
/// the truncated vector is renormalized to unit norm, and the Poisson mass
/// beyond the cutoff is reported in `truncation_tail`. Callers that need
/// the precondition `tail <= 1e-8` should inspect the field (construction
/// proceeds either way, per the warn-and-proceed contract).
#[derive(Debug, Clone)]
pub struct CoherentVector {
    entries: DVector<Complex64>,
    truncation_tail: f64,
}

impl CoherentVector {
    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Total Poisson mass beyond the cutoff, over all modes.
    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// `|v><v|` as a density matrix.
    pub fn projector(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(&self.entries)
    }
}

/// Unnormalized per-mode coherent coefficients `e^{-|a|^2/2} a^n / sqrt(n!)`
/// and the Poisson tail mass beyond the cutoff.
fn mode_coefficients(alpha: Complex64, levels: usize) -> (Vec<Complex64>, f64) {
    let mut coeff = Vec::with_capacity(levels);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut mass = 0.0;
    for n in 0..levels {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        mass += c.norm_sqr();
        coeff.push(c);
    }
    (coeff, (1.0 - mass).max(0.0))
}

/// Tensor product of per-mode coefficient vectors, mode 0 fastest.
fn kron_modes(spec: &FockSpec, per_mode: &[Vec<Complex64>]) -> DVector<Complex64> {
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for coeffs in per_mode {
        let mut next = Vec::with_capacity(v.len() * coeffs.len());
        for &c in coeffs {
            for &x in &v {
                next.push(x * c);
            }
        }
        v = next;
    }
    debug_assert_eq!(v.len(), spec.dim());
    DVector::from_vec(v)
}

/// Truncated coherent state for per-mode amplitudes `alphas`, renormalized
/// to unit norm.
pub fn coherent_vector_from_alphas(alphas: &[Complex64], fock: &FockSpec) -> Result<CoherentVector> {
    if alphas.len() != fock.modes {
        return Err(Error::DimensionMismatch {
            expected: fock.modes,
            actual: alphas.len(),
        });
    }
    let levels = fock.levels();
    let mut per_mode = Vec::with_capacity(alphas.len());
    let mut kept = 1.0;
    for &alpha in alphas {
        let (coeff, tail) = mode_coefficients(alpha, levels);
        kept *= 1.0 - tail;
        per_mode.push(coeff);
    }
    let mut entries = kron_modes(fock, &per_mode);
    let norm = entries.norm();
    if norm < 1e-300 {
        return Err(Error::InvalidParameter(
            "coherent amplitude far beyond the cutoff: truncated vector vanishes".into(),
        ));
    }
    entries /= Complex64::new(norm, 0.0);
    Ok(CoherentVector {
        entries,
        truncation_tail: (1.0 - kept).max(0.0),
    })
}

/// The coherent vector `v(S)` of a classical state on the basis's selected
/// modes.
pub fn coherent_vector(state: &FieldState, basis: &ModeBasis) -> Result<CoherentVector> {
    let amps = field_to_amplitudes(state, basis)?;
    coherent_vector_from_alphas(&amps.alpha, basis.fock())
}

/// Q probability `<v(S)| rho |v(S)>`.
///
/// Evaluated with the exact (untruncated-normalization) coherent
/// coefficients projected onto the cutoff space, which is the correct
/// Husimi-type density for any `rho` supported within the cutoff; for
/// states within the tail precondition this agrees with the normalized
/// overlap to `O(tail)`. Always in `[0, 1]`.
pub fn q_probability(rho: &DensityMatrix, state: &FieldState, basis: &ModeBasis) -> Result<f64> {
    let amps = field_to_amplitudes(state, basis)?;
    husimi_from_alphas(rho, &amps.alpha, basis.fock())
}

/// [`q_probability`] evaluated directly at per-mode amplitudes.
pub fn husimi_from_alphas(
    rho: &DensityMatrix,
    alphas: &[Complex64],
    fock: &FockSpec,
) -> Result<f64> {
    if alphas.len() != fock.modes {
        return Err(Error::DimensionMismatch {
            expected: fock.modes,
            actual: alphas.len(),
        });
    }
    if rho.dim() != fock.dim() {
        return Err(Error::DimensionMismatch {
            expected: fock.dim(),
            actual: rho.dim(),
        });
    }
    let levels = fock.levels();
    let per_mode: Vec<Vec<Complex64>> = alphas
        .iter()
        .map(|&a| mode_coefficients(a, levels).0)
        .collect();
    let v = kron_modes(fock, &per_mode);
    let rv = rho.entries() * &v;
    Ok(v.dotc(&rv).re.max(0.0))
}
