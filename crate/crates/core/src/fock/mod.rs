//! Truncated multimode bosonic Fock space.
//!
//! A space is described by a [`FockSpec`]: `modes` bosonic modes, each
//! truncated at occupation `n_max`, for a total dimension
//! `(n_max + 1)^modes`. Basis states are flat-indexed with **mode 0 varying
//! fastest**: the state with occupations `(n_0, n_1, ...)` sits at index
//! `n_0 + n_1 * (n_max+1) + n_2 * (n_max+1)^2 + ...`.

mod op;
mod poly;

pub use op::{
    build_annihilation, build_creation, build_number, build_quadrature_q, expectation,
    ground_state, random_density_matrix, DensityMatrix, OperatorMatrix,
};
pub use poly::{ModeMonomial, NormalPoly};

use crate::error::{Error, Result};

/// Shape of a truncated multimode Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpec {
    /// Number of bosonic modes.
    pub modes: usize,
    /// Per-mode occupation cutoff; each mode has `n_max + 1` levels.
    pub n_max: usize,
}

impl FockSpec {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        if modes < 1 {
            return Err(Error::InvalidParameter("modes must be >= 1".into()));
        }
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        let spec = Self { modes, n_max };
        // Guard against dimensions nothing downstream could allocate.
        if spec.dim_checked().is_none() {
            return Err(Error::InvalidParameter(format!(
                "Fock dimension (n_max+1)^modes overflows: n_max={n_max}, modes={modes}"
            )));
        }
        Ok(spec)
    }

    /// Levels per mode, `n_max + 1`.
    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    /// Total dimension `(n_max + 1)^modes`.
    pub fn dim(&self) -> usize {
        self.dim_checked().expect("dimension overflow")
    }

    fn dim_checked(&self) -> Option<usize> {
        let mut d: usize = 1;
        for _ in 0..self.modes {
            d = d.checked_mul(self.levels())?;
        }
        Some(d)
    }

    /// Flat index of a joint occupation vector (mode 0 fastest).
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                actual: occupations.len(),
            });
        }
        let mut idx = 0;
        let mut stride = 1;
        for &n in occupations {
            if n > self.n_max {
                return Err(Error::InvalidParameter(format!(
                    "occupation {n} exceeds n_max {}",
                    self.n_max
                )));
            }
            idx += n * stride;
            stride *= self.levels();
        }
        Ok(idx)
    }

    /// Occupation vector of a flat index.
    pub fn occupations_of(&self, index: usize) -> Vec<usize> {
        let mut occ = Vec::with_capacity(self.modes);
        let mut rest = index;
        for _ in 0..self.modes {
            occ.push(rest % self.levels());
            rest /= self.levels();
        }
        occ
    }

    /// Stride of `mode` in the flat index.
    pub fn stride(&self, mode: usize) -> usize {
        self.levels().pow(mode as u32)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            });
        }
        Ok(())
    }
}
