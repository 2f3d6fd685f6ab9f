//! Dense operators and density matrices over a truncated Fock space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::FockSpec;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-10;

/// Dense complex matrix acting on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wrap a matrix, tagging and checking Hermiticity when claimed.
    pub fn new(entries: DMatrix<Complex64>, hermitian: bool) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        if hermitian {
            let dev = hermiticity_deviation(&entries);
            if dev > HERMITIAN_TOL {
                return Err(Error::InvalidParameter(format!(
                    "matrix tagged hermitian deviates from A^H by {dev:.3e}"
                )));
            }
        }
        Ok(Self { entries, hermitian })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// `self + k * I`, preserving the Hermitian tag for real `k`.
    pub fn shift(&self, k: f64) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..entries.nrows() {
            entries[(i, i)] += Complex64::new(k, 0.0);
        }
        Self {
            entries,
            hermitian: self.hermitian,
        }
    }

    /// Difference as plain matrices; Hermitian iff both operands are.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self {
            entries: &self.entries - &other.entries,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Apply to a vector.
    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(&self.entries * v)
    }

    /// Quadratic form `<v|A|v>`.
    pub fn quadratic_form(&self, v: &DVector<Complex64>) -> Result<Complex64> {
        let av = self.apply(v)?;
        Ok(v.dotc(&av))
    }
}

fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Density matrix: Hermitian, unit-trace, positive semidefinite (up to a
/// numerical floor).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        let dev = hermiticity_deviation(&entries);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian: deviation {dev:.3e}"
            )));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {trace} != 1"
            )));
        }
        let min_eig = entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { entries })
    }

    /// Pure-state projector `|psi><psi|`; the vector is normalized first.
    pub fn from_pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        let entries = DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj());
        Ok(Self { entries })
    }

    /// Vacuum projector `|0><0|`.
    pub fn vacuum(dim: usize) -> Self {
        let mut entries = DMatrix::zeros(dim, dim);
        entries[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { entries }
    }

    /// Single-mode thermal state with mean occupation `n_bar`:
    /// diagonal entries `n_bar^n / (1 + n_bar)^(n+1)`, renormalized over the
    /// truncated levels.
    pub fn thermal_single_mode(dim: usize, n_bar: f64) -> Result<Self> {
        if n_bar < 0.0 {
            return Err(Error::InvalidParameter("n_bar must be >= 0".into()));
        }
        let mut entries = DMatrix::zeros(dim, dim);
        let mut total = 0.0;
        let mut weights = Vec::with_capacity(dim);
        for n in 0..dim {
            let w = n_bar.powi(n as i32) / (1.0 + n_bar).powi(n as i32 + 1);
            weights.push(w);
            total += w;
        }
        for (n, w) in weights.into_iter().enumerate() {
            entries[(n, n)] = Complex64::new(w / total, 0.0);
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut eig: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eig
    }

    /// Trace distance `0.5 * sum |eig(rho - sigma)|`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let diff = &self.entries - &other.entries;
        let eig = diff.symmetric_eigen().eigenvalues;
        Ok(0.5 * eig.iter().map(|e| e.abs()).sum::<f64>())
    }
}

/// Annihilation operator of `mode`: `<n-1|a|n> = sqrt(n)` on that mode's
/// ladder, identity on the others.
pub fn build_annihilation(spec: &FockSpec, mode: usize) -> Result<OperatorMatrix> {
    spec.check_mode(mode)?;
    let dim = spec.dim();
    let stride = spec.stride(mode);
    let levels = spec.levels();
    let mut m = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let n = (idx / stride) % levels;
        if n >= 1 {
            m[(idx - stride, idx)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    OperatorMatrix::new(m, false)
}

/// Creation operator, the adjoint of [`build_annihilation`].
pub fn build_creation(spec: &FockSpec, mode: usize) -> Result<OperatorMatrix> {
    Ok(build_annihilation(spec, mode)?.adjoint())
}

/// Number operator `a^dag a` of `mode` (diagonal).
pub fn build_number(spec: &FockSpec, mode: usize) -> Result<OperatorMatrix> {
    spec.check_mode(mode)?;
    let dim = spec.dim();
    let stride = spec.stride(mode);
    let levels = spec.levels();
    let mut m = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let n = (idx / stride) % levels;
        m[(idx, idx)] = Complex64::new(n as f64, 0.0);
    }
    OperatorMatrix::new(m, true)
}

/// Position quadrature `q = (a + a^dag)/sqrt(2)` of `mode`.
pub fn build_quadrature_q(spec: &FockSpec, mode: usize) -> Result<OperatorMatrix> {
    let a = build_annihilation(spec, mode)?;
    let entries = (a.entries() + a.entries().adjoint()) / Complex64::new(2.0_f64.sqrt(), 0.0);
    OperatorMatrix::new(entries, true)
}

/// `Tr(rho * op)`. Real to ~1e-10 when `op` is Hermitian.
pub fn expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<Complex64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: op.dim(),
        });
    }
    let r = rho.entries();
    let o = op.entries();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..r.nrows() {
        for k in 0..r.ncols() {
            tr += r[(i, k)] * o[(k, i)];
        }
    }
    Ok(tr)
}

/// Smallest eigenvalue and its normalized eigenvector.
///
/// The residual `|H v - E v|` is checked against `1e-8 * max|H|`.
pub fn ground_state(op: &OperatorMatrix) -> Result<(f64, DVector<Complex64>)> {
    if !op.is_hermitian() {
        return Err(Error::InvalidParameter(
            "ground_state requires a Hermitian operator".into(),
        ));
    }
    let eig = op.entries().clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let energy = eig.eigenvalues[best];
    let mut vector: DVector<Complex64> = eig.eigenvectors.column(best).into_owned();
    let norm = vector.norm();
    if norm < 1e-300 {
        return Err(Error::Eigen("degenerate eigenvector".into()));
    }
    vector /= Complex64::new(norm, 0.0);
    let residual = (op.entries() * &vector - &vector * Complex64::new(energy, 0.0)).norm();
    let scale = op.max_abs().max(1e-300);
    if residual > 1e-8 * scale {
        return Err(Error::Eigen(format!(
            "residual {residual:.3e} exceeds 1e-8 * |H| = {:.3e}",
            1e-8 * scale
        )));
    }
    Ok((energy, vector))
}

/// Random PSD unit-trace density matrix (`A A^H / tr`), for property tests
/// and the Q-positivity experiments.
pub fn random_density_matrix<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    use rand_distr::StandardNormal;
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut m = &a * a.adjoint();
    // Exact Hermitian symmetrization against roundoff.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }
    let tr = m.trace().re;
    m /= Complex64::new(tr, 0.0);
    DensityMatrix::new(m).expect("A A^H construction is PSD and unit trace")
}
