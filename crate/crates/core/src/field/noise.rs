//! Time-symmetric white-noise sources for the stochastic field equations.
//!
//! A [`NoiseBlock`] holds every source value of a planned integration window
//! up front: the realization is a fixed function over space-time, not
//! something generated on the fly during the forward sweep, so the same
//! block can be replayed in either time direction.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::LatticeSpec;
use crate::error::{Error, Result};

/// Stochastic-source specification: which components are driven, their
/// cross-component covariance, and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Component indices that carry a source (length `m`, `0 <= m <= N`).
    pub driven: Vec<usize>,
    /// `m x m` symmetric PSD covariance of the sources.
    pub sigma: DMatrix<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(driven: Vec<usize>, sigma: DMatrix<f64>, seed: u64) -> Result<Self> {
        let m = driven.len();
        if sigma.nrows() != m || sigma.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: sigma.nrows(),
            });
        }
        for i in 0..m {
            for j in 0..m {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(
                        "noise covariance must be symmetric".into(),
                    ));
                }
            }
        }
        // PSD check (and the factor used for sampling) via eigendecomposition,
        // which also accepts singular covariances like Sigma = 0.
        if m > 0 {
            let eig = sigma.clone().symmetric_eigen();
            if eig.eigenvalues.iter().any(|&e| e < -1e-12) {
                return Err(Error::InvalidParameter(
                    "noise covariance must be positive semidefinite".into(),
                ));
            }
        }
        Ok(Self { driven, sigma, seed })
    }

    pub fn m_sources(&self) -> usize {
        self.driven.len()
    }

    /// Symmetric square root of the covariance (eigendecomposition-based).
    fn sqrt_sigma(&self) -> DMatrix<f64> {
        let m = self.m_sources();
        if m == 0 {
            return DMatrix::zeros(0, 0);
        }
        let eig = self.sigma.clone().symmetric_eigen();
        let mut d = DMatrix::zeros(m, m);
        for i in 0..m {
            d[(i, i)] = eig.eigenvalues[i].max(0.0).sqrt();
        }
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    }
}

/// Realized source values for a whole integration window.
///
/// Entry `(step, source, site)` is drawn `N(0, Sigma)` across sources and
/// scaled by `1/sqrt(a dt)`, the lattice approximation of continuum white
/// noise. Bit-reproducible from the spec's seed.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBlock {
    /// `values[step][source][site]`.
    values: Vec<Vec<Vec<f64>>>,
    /// Component index driven by each source row.
    driven: Vec<usize>,
}

impl NoiseBlock {
    /// All-zero block (the deterministic limit).
    pub fn zero(driven: Vec<usize>, lattice: &LatticeSpec, steps: usize) -> Self {
        let m = driven.len();
        Self {
            values: vec![vec![vec![0.0; lattice.sites]; m]; steps],
            driven,
        }
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn driven(&self) -> &[usize] {
        &self.driven
    }

    /// Source values at one step: `[source][site]`.
    pub fn at_step(&self, step: usize) -> &[Vec<f64>] {
        &self.values[step]
    }

    /// The same realization read backwards in time.
    pub fn time_reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            values,
            driven: self.driven.clone(),
        }
    }

    /// Flat iterator over all values (used by moment checks).
    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .flat_map(|step| step.iter().flat_map(|row| row.iter().copied()))
    }
}

/// Draw a full noise block: i.i.d. in (site, step), covariance `Sigma`
/// across sources, variance scaled by `1/(a dt)`.
pub fn sample_noise_block(
    spec: &NoiseSpec,
    lattice: &LatticeSpec,
    steps: usize,
    dt: f64,
) -> Result<NoiseBlock> {
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be > 0".into()));
    }
    let m = spec.m_sources();
    let scale = 1.0 / (lattice.spacing * dt).sqrt();
    let sqrt_sigma = spec.sqrt_sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = vec![vec![vec![0.0; lattice.sites]; m]; steps];
    let mut z = vec![0.0; m];
    for step in values.iter_mut() {
        for site in 0..lattice.sites {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(&mut rng);
            }
            for i in 0..m {
                let mut v = 0.0;
                for (j, zj) in z.iter().enumerate() {
                    v += sqrt_sigma[(i, j)] * zj;
                }
                step[i][site] = scale * v;
            }
        }
    }
    Ok(NoiseBlock {
        values,
        driven: spec.driven.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(l: usize) -> LatticeSpec {
        LatticeSpec::new(l, 1.0).unwrap()
    }

    #[test]
    fn zero_covariance_gives_zero_block() {
        let spec = NoiseSpec::new(vec![0], DMatrix::zeros(1, 1), 3).unwrap();
        let block = sample_noise_block(&spec, &lattice(8), 10, 1.0).unwrap();
        assert!(block.iter_values().all(|v| v == 0.0));
    }

    #[test]
    fn unit_variance_matches_law_of_large_numbers() {
        // m=1, Sigma=[1], a=dt=1: sample variance over 1e6 draws within 1%.
        let spec = NoiseSpec::new(vec![0], DMatrix::from_element(1, 1, 1.0), 42).unwrap();
        let l = lattice(100);
        let block = sample_noise_block(&spec, &l, 10_000, 1.0).unwrap();
        let n = 1_000_000.0;
        let mean: f64 = block.iter_values().sum::<f64>() / n;
        let var: f64 = block.iter_values().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.01, "sample variance {var}");
    }

    #[test]
    fn cross_covariance_matches_sigma() {
        // m=2, off-diagonal 0.5: empirical cross-covariance within 2% at 1e6.
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let spec = NoiseSpec::new(vec![0, 1], sigma, 7).unwrap();
        let l = lattice(100);
        let block = sample_noise_block(&spec, &l, 10_000, 1.0).unwrap();
        let mut cross = 0.0;
        let mut count = 0.0;
        for step in 0..block.steps() {
            let rows = block.at_step(step);
            for site in 0..l.sites {
                cross += rows[0][site] * rows[1][site];
                count += 1.0;
            }
        }
        let cov = cross / count;
        assert!((cov - 0.5).abs() < 0.02 * 0.5, "cross covariance {cov}");
    }

    #[test]
    fn reproducible_from_seed() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let spec = NoiseSpec::new(vec![0, 2], sigma, 11).unwrap();
        let l = lattice(16);
        let b1 = sample_noise_block(&spec, &l, 50, 0.01).unwrap();
        let b2 = sample_noise_block(&spec, &l, 50, 0.01).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 1.0]);
        assert!(NoiseSpec::new(vec![0, 1], sigma, 0).is_err());
    }

    #[test]
    fn non_psd_covariance_rejected() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(NoiseSpec::new(vec![0, 1], sigma, 0).is_err());
    }
}
