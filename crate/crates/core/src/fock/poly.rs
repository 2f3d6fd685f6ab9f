//! Normal-ordered polynomials in multimode ladder operators.
//!
//! A [`NormalPoly`] is a sum of monomials `c * prod_s (a_s^dag)^{k_s} *
//! prod_s (a_s)^{l_s}` with every creation operator to the left of every
//! annihilation operator. Because a normal-ordered monomial changes each
//! mode's occupation by the fixed offset `k_s - l_s`, application to a state
//! vector is a banded shift per mode and never requires the full dense
//! matrix. That keeps multimode expectation values tractable at dimensions
//! where a dense Hamiltonian would not fit in memory.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{FockSpec, OperatorMatrix};
use crate::error::{Error, Result};

/// Per-mode creation/annihilation powers of one normal-ordered monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModeMonomial {
    /// Powers of `a^dag` per mode.
    pub creators: Vec<u32>,
    /// Powers of `a` per mode.
    pub annihilators: Vec<u32>,
}

impl ModeMonomial {
    pub fn new(creators: Vec<u32>, annihilators: Vec<u32>) -> Self {
        debug_assert_eq!(creators.len(), annihilators.len());
        Self {
            creators,
            annihilators,
        }
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            creators: vec![0; modes],
            annihilators: vec![0; modes],
        }
    }

    fn conjugate(&self) -> Self {
        Self {
            creators: self.annihilators.clone(),
            annihilators: self.creators.clone(),
        }
    }
}

/// Sum of normal-ordered monomials over a fixed number of modes.
#[derive(Debug, Clone, Default)]
pub struct NormalPoly {
    modes: usize,
    terms: BTreeMap<ModeMonomial, Complex64>,
}

impl NormalPoly {
    pub fn new(modes: usize) -> Self {
        Self {
            modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeMonomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Accumulate `coeff * monomial`.
    pub fn add_term(&mut self, monomial: ModeMonomial, coeff: Complex64) {
        assert_eq!(monomial.creators.len(), self.modes, "monomial mode count");
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self
            .terms
            .entry(monomial)
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() == 0.0 {
            // keep the map canonical so that term counts are meaningful
        }
    }

    /// Add `k * I`.
    pub fn add_constant(&mut self, k: Complex64) {
        self.add_term(ModeMonomial::identity(self.modes), k);
    }

    /// Add the single-mode number operator `w * a^dag a`.
    pub fn add_number(&mut self, mode: usize, w: f64) {
        let mut creators = vec![0; self.modes];
        let mut annihilators = vec![0; self.modes];
        creators[mode] = 1;
        annihilators[mode] = 1;
        self.add_term(
            ModeMonomial::new(creators, annihilators),
            Complex64::new(w, 0.0),
        );
    }

    /// Add `coeff * :q^k:` on one mode, with `q = (a + a^dag)/sqrt(2)`:
    /// the normal-ordered power is `2^{-k/2} sum_j C(k,j) a^dag^j a^{k-j}`.
    pub fn add_normal_q_power(&mut self, mode: usize, k: u32, coeff: f64) {
        let scale = coeff / 2f64.powf(k as f64 / 2.0);
        for j in 0..=k {
            let mut creators = vec![0; self.modes];
            let mut annihilators = vec![0; self.modes];
            creators[mode] = j;
            annihilators[mode] = k - j;
            self.add_term(
                ModeMonomial::new(creators, annihilators),
                Complex64::new(scale * binomial(k, j), 0.0),
            );
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = Self::new(self.modes);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    /// Whether the polynomial is formally self-adjoint: each monomial's
    /// conjugate appears with the conjugate coefficient.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        for (m, c) in &self.terms {
            let want = c.conj();
            let got = self
                .terms
                .get(&m.conjugate())
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            if (got - want).norm() > tol {
                return false;
            }
        }
        true
    }

    /// Reorder a sum of *anti-normal* monomials (all `a` powers to the left
    /// of all `a^dag` powers) into normal form, using the exact single-mode
    /// identity `a^m a^dag^n = sum_k k! C(m,k) C(n,k) a^dag^{n-k} a^{m-k}`.
    ///
    /// The input reuses [`ModeMonomial`] with `annihilators` interpreted as
    /// the left block.
    pub fn from_anti_normal(modes: usize, terms: &[(ModeMonomial, Complex64)]) -> Self {
        let mut out = Self::new(modes);
        for (mono, coeff) in terms {
            // Per-mode expansion alternatives: (factor, creators, annihilators).
            let mut alternatives: Vec<Vec<(f64, u32, u32)>> = Vec::with_capacity(modes);
            for s in 0..modes {
                let m = mono.annihilators[s];
                let n = mono.creators[s];
                let mut alts = Vec::new();
                for k in 0..=m.min(n) {
                    alts.push((
                        factorial(k) * binomial(m, k) * binomial(n, k),
                        n - k,
                        m - k,
                    ));
                }
                alternatives.push(alts);
            }
            // Cartesian product across modes.
            let mut stack: Vec<(usize, f64, Vec<u32>, Vec<u32>)> =
                vec![(0, 1.0, Vec::new(), Vec::new())];
            while let Some((mode, factor, cre, ann)) = stack.pop() {
                if mode == modes {
                    out.add_term(ModeMonomial::new(cre, ann), coeff * factor);
                    continue;
                }
                for &(f, c, a) in &alternatives[mode] {
                    let mut cre2 = cre.clone();
                    let mut ann2 = ann.clone();
                    cre2.push(c);
                    ann2.push(a);
                    stack.push((mode + 1, factor * f, cre2, ann2));
                }
            }
        }
        out
    }

    /// Apply the polynomial to a state vector in the truncated space.
    pub fn apply(&self, spec: &FockSpec, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                actual: v.len(),
            });
        }
        if spec.modes != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                actual: spec.modes,
            });
        }
        let mut out = DVector::zeros(v.len());
        let mut work = DVector::zeros(v.len());
        let mut work2 = DVector::zeros(v.len());
        for (mono, coeff) in &self.terms {
            work.copy_from(v);
            for s in 0..self.modes {
                let (c, n) = (mono.creators[s], mono.annihilators[s]);
                if c == 0 && n == 0 {
                    continue;
                }
                apply_mode_factor(spec, s, c, n, &work, &mut work2);
                std::mem::swap(&mut work, &mut work2);
            }
            out.axpy(*coeff, &work, Complex64::new(1.0, 0.0));
        }
        Ok(out)
    }

    /// `<v| P |v>`.
    pub fn expectation(&self, spec: &FockSpec, v: &DVector<Complex64>) -> Result<Complex64> {
        let pv = self.apply(spec, v)?;
        Ok(v.dotc(&pv))
    }

    /// Dense matrix assembly (column-by-column application).
    pub fn to_matrix(&self, spec: &FockSpec) -> Result<OperatorMatrix> {
        let dim = spec.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut basis = DVector::zeros(dim);
        for j in 0..dim {
            basis[j] = Complex64::new(1.0, 0.0);
            let col = self.apply(spec, &basis)?;
            m.set_column(j, &col);
            basis[j] = Complex64::new(0.0, 0.0);
        }
        let hermitian = self.is_self_adjoint(1e-12);
        if hermitian {
            // Symmetrize away roundoff so the tag's 1e-12 invariant holds.
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                    m[(i, j)] = avg;
                    m[(j, i)] = avg.conj();
                }
                m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            }
        }
        OperatorMatrix::new(m, hermitian)
    }
}

/// Apply `(a^dag)^c a^n` on one mode: a banded shift of the occupation by
/// `c - n` with level-dependent square-root factors.
fn apply_mode_factor(
    spec: &FockSpec,
    mode: usize,
    c: u32,
    n: u32,
    input: &DVector<Complex64>,
    out: &mut DVector<Complex64>,
) {
    let levels = spec.levels();
    let stride = spec.stride(mode);
    // Factor for input level m: sqrt(m (m-1) .. (m-n+1)) * sqrt((m-n+1+c)!/(m-n)!)
    let mut factors = vec![0.0_f64; levels];
    for (m, f) in factors.iter_mut().enumerate() {
        let m = m as i64;
        let (c, n) = (c as i64, n as i64);
        if m < n || m - n + c >= levels as i64 {
            continue;
        }
        let mut val = 1.0;
        for j in 0..n {
            val *= ((m - j) as f64).sqrt();
        }
        for j in 1..=c {
            val *= ((m - n + j) as f64).sqrt();
        }
        *f = val;
    }
    let delta = c as i64 - n as i64;
    out.fill(Complex64::new(0.0, 0.0));
    let block = stride * levels;
    let dim = input.len();
    let mut base = 0;
    while base < dim {
        for lo in 0..stride {
            for m in 0..levels {
                let f = factors[m];
                if f == 0.0 {
                    continue;
                }
                let src = base + lo + m * stride;
                let dst = (src as i64 + delta * stride as i64) as usize;
                out[dst] += f * input[src];
            }
        }
        base += block;
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    for j in 0..k {
        num = num * (n - j) as f64 / (j + 1) as f64;
    }
    num
}
