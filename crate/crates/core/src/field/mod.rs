//! Classical lattice field theory in one spatial dimension.
//!
//! Fields live on a periodic lattice of `L` sites with spacing `a`. The
//! energy functional is
//!
//! ```text
//!   E = a * sum_x sum_j [ pi_j^2/2 + (grad phi_j)^2/2 + m_j^2 phi_j^2/2 + V(phi_j) ]
//! ```
//!
//! with the forward lattice difference `grad phi(x) = (phi(x+a) - phi(x))/a`
//! and force terms derived from the same discrete energy, so the symplectic
//! integrator conserves exactly the quantity it is tested against.
//!
//! For the sine-Gordon potential the field is compact with period
//! `2 pi m / sqrt(lambda)`; link differences are wrapped to the minimal
//! image so a single kink is a finite-energy, stationary configuration on
//! the periodic lattice.

mod integrate;
mod noise;

pub use integrate::{integrate, integrate_with_sources, leapfrog_step, reverse_momenta, Trajectory};
pub use noise::{sample_noise_block, NoiseBlock, NoiseSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Periodic spatial lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Number of sites `L`.
    pub sites: usize,
    /// Lattice spacing `a`.
    pub spacing: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, spacing: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidParameter("lattice needs >= 2 sites".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter("lattice spacing must be > 0".into()));
        }
        Ok(Self { sites, spacing })
    }

    /// Physical length `L * a`.
    pub fn length(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    /// Momentum of mode `k`: `2 pi k / (L a)`.
    pub fn momentum(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.length()
    }
}

/// Self-interaction beyond the quadratic mass term.
///
/// `classical_energy` always adds the `m^2 phi^2 / 2` mass term, so each
/// variant stores only the interaction part (with `V(0) = V'(0) = V''(0) =
/// 0`). For sine-Gordon the *total* potential, mass term included, is the
/// usual `(m^4/lambda)(1 - cos(sqrt(lambda) phi / m))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// Free Klein-Gordon field.
    Free,
    /// `V(phi) = lambda * phi^4`.
    Phi4 { lambda: f64 },
    /// Sine-Gordon with mass parameter `m` and coupling `lambda`; the kink
    /// has classical energy `8 m^3 / lambda`.
    SineGordon { m: f64, lambda: f64 },
    /// Explicit polynomial interaction `sum_k c_k phi^k` with powers >= 3;
    /// used e.g. for small-amplitude polynomial truncations of sine-Gordon.
    Polynomial { terms: Vec<(u32, f64)> },
}

impl Potential {
    /// Interaction energy density at field value `phi`.
    pub fn energy(&self, phi: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Phi4 { lambda } => lambda * phi.powi(4),
            Potential::SineGordon { m, lambda } => {
                let u = lambda.sqrt() * phi / m;
                (m.powi(4) / lambda) * (1.0 - u.cos()) - 0.5 * m * m * phi * phi
            }
            Potential::Polynomial { terms } => {
                terms.iter().map(|&(k, c)| c * phi.powi(k as i32)).sum()
            }
        }
    }

    /// `dV/dphi` of the interaction part.
    pub fn derivative(&self, phi: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Phi4 { lambda } => 4.0 * lambda * phi.powi(3),
            Potential::SineGordon { m, lambda } => {
                let u = lambda.sqrt() * phi / m;
                (m.powi(3) / lambda.sqrt()) * u.sin() - m * m * phi
            }
            Potential::Polynomial { terms } => terms
                .iter()
                .map(|&(k, c)| c * k as f64 * phi.powi(k as i32 - 1))
                .sum(),
        }
    }

    /// Field period for compact potentials (sine-Gordon), else None.
    pub fn field_period(&self) -> Option<f64> {
        match self {
            Potential::SineGordon { m, lambda } => {
                Some(2.0 * std::f64::consts::PI * m / lambda.sqrt())
            }
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Potential::Free => Ok(()),
            Potential::Phi4 { lambda } => {
                if *lambda >= 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("phi4 lambda must be >= 0".into()))
                }
            }
            Potential::SineGordon { m, lambda } => {
                if *m > 0.0 && *lambda > 0.0 && m.is_finite() && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "sine-Gordon needs m > 0 and lambda > 0".into(),
                    ))
                }
            }
            Potential::Polynomial { terms } => {
                for &(k, c) in terms {
                    if k < 3 {
                        return Err(Error::InvalidParameter(
                            "polynomial interaction powers must be >= 3".into(),
                        ));
                    }
                    if !c.is_finite() {
                        return Err(Error::InvalidParameter(
                            "polynomial coefficient not finite".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Lagrangian/Hamiltonian parameters of an `N`-component scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldModel {
    /// Mass per component; also sets the quadratic term in the energy.
    pub masses: Vec<f64>,
    pub potential: Potential,
    pub lattice: LatticeSpec,
}

impl FieldModel {
    pub fn new(masses: Vec<f64>, potential: Potential, lattice: LatticeSpec) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParameter("need >= 1 component".into()));
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameter("masses must be finite, >= 0".into()));
        }
        potential.validate()?;
        if let Potential::SineGordon { m, .. } = potential {
            if masses.len() != 1 || (masses[0] - m).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "sine-Gordon is single-component with mass equal to its m parameter".into(),
                ));
            }
        }
        Ok(Self {
            masses,
            potential,
            lattice,
        })
    }

    pub fn free(mass: f64, lattice: LatticeSpec) -> Result<Self> {
        Self::new(vec![mass], Potential::Free, lattice)
    }

    pub fn phi4(mass: f64, lambda: f64, lattice: LatticeSpec) -> Result<Self> {
        Self::new(vec![mass], Potential::Phi4 { lambda }, lattice)
    }

    pub fn sine_gordon(m: f64, lambda: f64, lattice: LatticeSpec) -> Result<Self> {
        Self::new(vec![m], Potential::SineGordon { m, lambda }, lattice)
    }

    pub fn components(&self) -> usize {
        self.masses.len()
    }

    /// Forward difference wrapped to the minimal image for compact fields.
    pub(crate) fn link_difference(&self, next: f64, here: f64) -> f64 {
        let d = next - here;
        match self.potential.field_period() {
            Some(period) => d - period * (d / period).round(),
            None => d,
        }
    }
}

/// Classical state `S`: field values and conjugate momenta per component.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// `phi[j][x]` for component `j`, site `x`.
    pub phi: Vec<Vec<f64>>,
    /// `pi[j][x]`.
    pub pi: Vec<Vec<f64>>,
}

impl FieldState {
    pub fn new(phi: Vec<Vec<f64>>, pi: Vec<Vec<f64>>) -> Result<Self> {
        if phi.is_empty() || phi.len() != pi.len() {
            return Err(Error::InvalidParameter(
                "phi and pi must have the same nonzero component count".into(),
            ));
        }
        let sites = phi[0].len();
        for arr in phi.iter().chain(pi.iter()) {
            if arr.len() != sites {
                return Err(Error::InvalidParameter(
                    "all component arrays must share the site count".into(),
                ));
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: 0 });
            }
        }
        Ok(Self { phi, pi })
    }

    pub fn zeros(components: usize, sites: usize) -> Self {
        Self {
            phi: vec![vec![0.0; sites]; components],
            pi: vec![vec![0.0; sites]; components],
        }
    }

    pub fn components(&self) -> usize {
        self.phi.len()
    }

    pub fn sites(&self) -> usize {
        self.phi[0].len()
    }

    pub fn is_finite(&self) -> bool {
        self.phi
            .iter()
            .chain(self.pi.iter())
            .all(|arr| arr.iter().all(|v| v.is_finite()))
    }

    fn check_shape(&self, model: &FieldModel) -> Result<()> {
        if self.components() != model.components() {
            return Err(Error::DimensionMismatch {
                expected: model.components(),
                actual: self.components(),
            });
        }
        if self.sites() != model.lattice.sites {
            return Err(Error::DimensionMismatch {
                expected: model.lattice.sites,
                actual: self.sites(),
            });
        }
        Ok(())
    }

    /// Cyclic shift by `offset` sites (used for translation checks).
    pub fn translated(&self, offset: usize) -> Self {
        let shift = |arr: &Vec<f64>| -> Vec<f64> {
            let l = arr.len();
            (0..l).map(|i| arr[(i + l - offset % l) % l]).collect()
        };
        Self {
            phi: self.phi.iter().map(shift).collect(),
            pi: self.pi.iter().map(shift).collect(),
        }
    }
}

/// Total energy `H(S)` of a state under a model.
pub fn classical_energy(state: &FieldState, model: &FieldModel) -> Result<f64> {
    state.check_shape(model)?;
    if !state.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    let a = model.lattice.spacing;
    let l = model.lattice.sites;
    let mut total = 0.0;
    for j in 0..model.components() {
        let m2 = model.masses[j] * model.masses[j];
        let phi = &state.phi[j];
        let pi = &state.pi[j];
        for x in 0..l {
            let grad = model.link_difference(phi[(x + 1) % l], phi[x]) / a;
            total += 0.5 * pi[x] * pi[x]
                + 0.5 * grad * grad
                + 0.5 * m2 * phi[x] * phi[x]
                + model.potential.energy(phi[x]);
        }
    }
    Ok(a * total)
}

/// `d pi_j(x) / dt`: the discrete-gradient force of `classical_energy`.
pub(crate) fn force_into(state: &FieldState, model: &FieldModel, out: &mut [Vec<f64>]) {
    let a = model.lattice.spacing;
    let l = model.lattice.sites;
    for j in 0..model.components() {
        let m2 = model.masses[j] * model.masses[j];
        let phi = &state.phi[j];
        let f = &mut out[j];
        for x in 0..l {
            let fwd = model.link_difference(phi[(x + 1) % l], phi[x]);
            let bwd = model.link_difference(phi[x], phi[(x + l - 1) % l]);
            f[x] = (fwd - bwd) / (a * a) - m2 * phi[x] - model.potential.derivative(phi[x]);
        }
    }
}

/// Named initial configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Vacuum,
    /// Sine-Gordon kink centered at `center` (physical position).
    Kink { center: f64 },
    /// `phi(x) = amplitude * cos(p_k x)`, `pi = 0`.
    PlaneWave { k: usize, amplitude: f64 },
    /// i.i.d. Gaussian `phi`, `pi` with standard deviation `sigma`.
    GaussianRandom { sigma: f64, seed: u64 },
}

/// Build one of the named configurations on the model's lattice.
pub fn make_initial_state(kind: &InitialState, model: &FieldModel) -> Result<FieldState> {
    let l = model.lattice.sites;
    let a = model.lattice.spacing;
    let n = model.components();
    match kind {
        InitialState::Vacuum => Ok(FieldState::zeros(n, l)),
        InitialState::Kink { center } => {
            let Potential::SineGordon { m, lambda } = model.potential else {
                return Err(Error::Unsupported(
                    "kink initial state requires the sine-Gordon potential".into(),
                ));
            };
            let mut state = FieldState::zeros(n, l);
            for x in 0..l {
                let pos = x as f64 * a - center;
                state.phi[0][x] = (4.0 * m / lambda.sqrt()) * (m * pos).exp().atan();
            }
            Ok(state)
        }
        InitialState::PlaneWave { k, amplitude } => {
            if *k >= l {
                return Err(Error::InvalidParameter(format!(
                    "plane-wave mode {k} out of range for L={l}"
                )));
            }
            let p = model.lattice.momentum(*k);
            let mut state = FieldState::zeros(n, l);
            for j in 0..n {
                for x in 0..l {
                    state.phi[j][x] = amplitude * (p * x as f64 * a).cos();
                }
            }
            Ok(state)
        }
        InitialState::GaussianRandom { sigma, seed } => {
            if !(*sigma >= 0.0) {
                return Err(Error::InvalidParameter("sigma must be >= 0".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let normal = Normal::new(0.0, *sigma)
                .map_err(|e| Error::InvalidParameter(format!("bad sigma: {e}")))?;
            let mut state = FieldState::zeros(n, l);
            for j in 0..n {
                for x in 0..l {
                    state.phi[j][x] = normal.sample(&mut rng);
                }
                for x in 0..l {
                    state.pi[j][x] = normal.sample(&mut rng);
                }
            }
            Ok(state)
        }
    }
}
