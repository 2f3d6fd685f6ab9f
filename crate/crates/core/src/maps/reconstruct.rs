//! Density-matrix reconstruction from classical ensembles: the Monte Carlo
//! average of coherent projectors over a probability distribution on field
//! states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{amplitudes_to_field, coherent_vector, field_to_amplitudes, ModeAmplitudes, ModeBasis};
use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::fock::DensityMatrix;

/// A probability distribution over classical states: either an explicit
/// finite mixture or a generative Gaussian spread in the selected-mode
/// coherent amplitudes around a base state.
#[derive(Debug, Clone)]
pub enum ClassicalEnsemble {
    /// `(state, weight)` pairs; weights are nonnegative and sum to 1.
    Weighted(Vec<(FieldState, f64)>),
    /// Base state plus i.i.d. complex Gaussian amplitude spread: per mode
    /// `s`, both quadratures of `delta alpha_s` are `N(0, mode_std[s]^2)`.
    Gaussian {
        base: FieldState,
        mode_std: Vec<f64>,
        seed: u64,
    },
}

impl ClassicalEnsemble {
    /// Deterministic single-state ensemble.
    pub fn point(state: FieldState) -> Self {
        Self::Weighted(vec![(state, 1.0)])
    }

    pub fn weighted(members: Vec<(FieldState, f64)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        }
        if members.iter().any(|(_, w)| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be >= 0".into()));
        }
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self::Weighted(members))
    }

    pub fn gaussian(base: FieldState, mode_std: Vec<f64>, seed: u64) -> Result<Self> {
        if mode_std.iter().any(|s| *s < 0.0 || !s.is_finite()) {
            return Err(Error::InvalidParameter("mode_std must be >= 0".into()));
        }
        Ok(Self::Gaussian {
            base,
            mode_std,
            seed,
        })
    }

    /// Draw `count` states (generative ensembles) or fail for finite ones.
    pub(crate) fn draw_states(
        &self,
        basis: &ModeBasis,
        count: usize,
    ) -> Result<Vec<FieldState>> {
        match self {
            ClassicalEnsemble::Weighted(_) => Err(Error::InvalidParameter(
                "finite weighted ensembles are evaluated exactly, not sampled".into(),
            )),
            ClassicalEnsemble::Gaussian {
                base,
                mode_std,
                seed,
            } => {
                if mode_std.len() != basis.num_modes() {
                    return Err(Error::DimensionMismatch {
                        expected: basis.num_modes(),
                        actual: mode_std.len(),
                    });
                }
                let base_alpha = field_to_amplitudes(base, basis)?.alpha;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let alpha: Vec<Complex64> = base_alpha
                        .iter()
                        .zip(mode_std.iter())
                        .map(|(a0, std)| {
                            let re: f64 = rng.sample(StandardNormal);
                            let im: f64 = rng.sample(StandardNormal);
                            a0 + Complex64::new(std * re, std * im)
                        })
                        .collect();
                    let amps = ModeAmplitudes::from_alphas(basis, alpha)?;
                    out.push(amplitudes_to_field(&amps, basis)?);
                }
                Ok(out)
            }
        }
    }
}

/// Result of a P-style reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    /// Frobenius-norm standard-error estimate of the Monte Carlo mean
    /// (zero for exact finite mixtures).
    pub stat_error: f64,
    pub samples_used: usize,
    /// Largest per-member coherent truncation tail encountered.
    pub max_truncation_tail: f64,
}

/// Average of normalized coherent projectors `|v(S)><v(S)|` over the
/// ensemble: exact for finite mixtures, Monte Carlo with `samples` draws
/// for generative ones. The output is trace-normalized.
pub fn p_reconstruct(
    ensemble: &ClassicalEnsemble,
    basis: &ModeBasis,
    samples: usize,
) -> Result<Reconstruction> {
    let dim = basis.fock().dim();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    let mut max_tail = 0.0_f64;
    let used;
    match ensemble {
        ClassicalEnsemble::Weighted(members) => {
            for (state, weight) in members {
                let v = coherent_vector(state, basis)?;
                max_tail = max_tail.max(v.truncation_tail());
                accumulate_projector(&mut acc, v.entries(), *weight);
            }
            used = members.len();
        }
        ClassicalEnsemble::Gaussian { .. } => {
            if samples == 0 {
                return Err(Error::InvalidParameter(
                    "p_reconstruct needs samples >= 1".into(),
                ));
            }
            let states = ensemble.draw_states(basis, samples)?;
            let w = 1.0 / samples as f64;
            for state in &states {
                let v = coherent_vector(state, basis)?;
                max_tail = max_tail.max(v.truncation_tail());
                accumulate_projector(&mut acc, v.entries(), w);
            }
            used = samples;
        }
    }
    // Exact Hermitian symmetrization and trace normalization.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (acc[(i, j)] + acc[(j, i)].conj());
            acc[(i, j)] = avg;
            acc[(j, i)] = avg.conj();
        }
        acc[(i, i)] = Complex64::new(acc[(i, i)].re, 0.0);
    }
    let trace = acc.trace().re;
    if trace <= 0.0 {
        return Err(Error::InvalidParameter("reconstruction has zero trace".into()));
    }
    acc /= Complex64::new(trace, 0.0);
    let purity: f64 = acc.iter().map(|z| z.norm_sqr()).sum();
    let stat_error = match ensemble {
        ClassicalEnsemble::Weighted(_) => 0.0,
        // E||P - rho||_F^2 = 1 - ||rho||_F^2 for unit-norm projectors.
        ClassicalEnsemble::Gaussian { .. } => ((1.0 - purity).max(0.0) / used as f64).sqrt(),
    };
    Ok(Reconstruction {
        rho: DensityMatrix::new(acc)?,
        stat_error,
        samples_used: used,
        max_truncation_tail: max_tail,
    })
}

fn accumulate_projector(
    acc: &mut DMatrix<Complex64>,
    v: &nalgebra::DVector<Complex64>,
    weight: f64,
) {
    let dim = v.len();
    for j in 0..dim {
        let vj = v[j].conj() * weight;
        if vj.norm_sqr() == 0.0 {
            continue;
        }
        for i in 0..dim {
            acc[(i, j)] += v[i] * vj;
        }
    }
}
