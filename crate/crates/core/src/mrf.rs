//! Finite-state statistics over a space-time lattice.
//!
//! Two joint laws over the same `nx * nt` grid of `q`-state sites:
//!
//! * [`MpModel`]: a time-forwards Markov process: the `t = 0` slice is
//!   drawn from an initial law, and each later site is drawn from a shared
//!   conditional table given its three parents on the previous slice
//!   (left, center, right; periodic in space).
//! * [`MrfModel`]: a Markov random field: one positive pair potential on
//!   every nearest-neighbor edge (spatial and temporal), with optional
//!   clamped slices at *both* time ends. No time direction is preferred;
//!   conditioning a site involves its past and its future symmetrically.
//!
//! Both come with exact enumeration oracles at desk scale, samplers
//! (forward sampling and single-site Gibbs sweeps in raster order), a
//! time-reflection diagnostic, and a best-effort fit of a Markov process to
//! a target joint for the "no forward process reproduces this field"
//! counterexample experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest enumerable configuration count.
const ENUM_LIMIT: u128 = 1 << 20;

/// Joint distribution over full space-time configurations.
///
/// Configuration index: site `(x, t)` is digit `t * nx + x` in base `q`,
/// site 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub nx: usize,
    pub nt: usize,
    pub q: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    fn zeros(nx: usize, nt: usize, q: usize) -> Result<Self> {
        let size =
            (q as u128)
                .checked_pow((nx * nt) as u32)
                .ok_or(Error::EnumerationTooLarge {
                    size: u128::MAX,
                    limit: ENUM_LIMIT,
                })?;
        if size > ENUM_LIMIT {
            return Err(Error::EnumerationTooLarge {
                size,
                limit: ENUM_LIMIT,
            });
        }
        Ok(Self {
            nx,
            nt,
            q,
            probs: vec![0.0; size as usize],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn index_of(&self, config: &[u8]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for &s in config {
            idx += s as usize * stride;
            stride *= self.q;
        }
        idx
    }

    pub fn config_of(&self, mut idx: usize) -> Vec<u8> {
        let mut cfg = vec![0u8; self.nx * self.nt];
        for c in cfg.iter_mut() {
            *c = (idx % self.q) as u8;
            idx /= self.q;
        }
        cfg
    }

    /// Total-variation distance `0.5 * sum |p - q|`.
    pub fn tv_distance(&self, other: &JointDistribution) -> Result<f64> {
        if self.probs.len() != other.probs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.probs.len(),
                actual: other.probs.len(),
            });
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(other.probs.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// The joint with time reflected: `t -> nt - 1 - t`.
    pub fn time_reflected(&self) -> JointDistribution {
        let mut out = self.clone();
        for (idx, slot) in out.probs.iter_mut().enumerate() {
            let cfg = self.config_of(idx);
            let mut reflected = vec![0u8; cfg.len()];
            for t in 0..self.nt {
                for x in 0..self.nx {
                    reflected[(self.nt - 1 - t) * self.nx + x] = cfg[t * self.nx + x];
                }
            }
            *slot = self.probs[self.index_of(&reflected)];
        }
        out
    }

    /// Marginal law of one site.
    pub fn site_marginal(&self, x: usize, t: usize) -> Vec<f64> {
        let site = t * self.nx + x;
        let stride = self.q.pow(site as u32);
        let mut marg = vec![0.0; self.q];
        for (idx, &p) in self.probs.iter().enumerate() {
            marg[(idx / stride) % self.q] += p;
        }
        marg
    }

    /// Joint law of one whole time slice (length `q^nx`).
    pub fn slice_joint(&self, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.q.pow(self.nx as u32)];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let cfg = self.config_of(idx);
            let mut slice_idx = 0;
            let mut stride = 1;
            for x in 0..self.nx {
                slice_idx += cfg[t * self.nx + x] as usize * stride;
                stride *= self.q;
            }
            out[slice_idx] += p;
        }
        out
    }
}

/// One drawn configuration with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSample {
    /// Value of site `(x, t)` at `values[t * nx + x]`.
    pub values: Vec<u8>,
    pub sampler: &'static str,
    pub seed: u64,
    pub sweeps: usize,
}

/// Initial law of the `t = 0` slice of a Markov process.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceInit {
    /// i.i.d. per site (length `q`).
    PerSite(Vec<f64>),
    /// Joint law over the whole slice (length `q^nx`), site 0 fastest.
    Joint(Vec<f64>),
}

/// Simplest local Markov process: shared conditional table over the three
/// previous-slice parents.
#[derive(Debug, Clone, PartialEq)]
pub struct MpModel {
    pub nx: usize,
    pub nt: usize,
    pub q: usize,
    /// `f(next | left, center, right)` at
    /// `transition[((left*q + center)*q + right)*q + next]`; each parent
    /// combination's row sums to 1.
    pub transition: Vec<f64>,
    pub initial: SliceInit,
}

impl MpModel {
    pub fn new(
        nx: usize,
        nt: usize,
        q: usize,
        transition: Vec<f64>,
        initial: SliceInit,
    ) -> Result<Self> {
        if nx < 1 || nt < 1 || q < 2 {
            return Err(Error::InvalidParameter("need nx,nt >= 1 and q >= 2".into()));
        }
        if transition.len() != q * q * q * q {
            return Err(Error::DimensionMismatch {
                expected: q * q * q * q,
                actual: transition.len(),
            });
        }
        for row in 0..q * q * q {
            let sum: f64 = transition[row * q..(row + 1) * q].iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "transition row {row} sums to {sum}, expected 1"
                )));
            }
            if transition[row * q..(row + 1) * q].iter().any(|p| *p < 0.0) {
                return Err(Error::InvalidParameter(
                    "transition probabilities must be >= 0".into(),
                ));
            }
        }
        match &initial {
            SliceInit::PerSite(p) => {
                if p.len() != q {
                    return Err(Error::DimensionMismatch {
                        expected: q,
                        actual: p.len(),
                    });
                }
                check_distribution(p)?;
            }
            SliceInit::Joint(p) => {
                if p.len() != q.pow(nx as u32) {
                    return Err(Error::DimensionMismatch {
                        expected: q.pow(nx as u32),
                        actual: p.len(),
                    });
                }
                check_distribution(p)?;
            }
        }
        Ok(Self {
            nx,
            nt,
            q,
            transition,
            initial,
        })
    }

    fn f(&self, left: u8, center: u8, right: u8, next: u8) -> f64 {
        let q = self.q;
        self.transition
            [((left as usize * q + center as usize) * q + right as usize) * q + next as usize]
    }

    /// Probability of a `t = 0` slice configuration.
    fn initial_prob(&self, slice: &[u8]) -> f64 {
        match &self.initial {
            SliceInit::PerSite(p) => slice.iter().map(|&s| p[s as usize]).product(),
            SliceInit::Joint(p) => {
                let mut idx = 0;
                let mut stride = 1;
                for &s in slice {
                    idx += s as usize * stride;
                    stride *= self.q;
                }
                p[idx]
            }
        }
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter("probabilities must be >= 0".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "distribution sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Markov random field with one pair potential on every nearest-neighbor
/// edge and optional clamped slices at both time ends.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfModel {
    pub nx: usize,
    pub nt: usize,
    pub q: usize,
    /// `psi(s, s')` at `psi[s*q + s']`, strictly positive. Edges are
    /// oriented left->right and past->future; a symmetric table makes the
    /// orientation irrelevant.
    pub psi: Vec<f64>,
    /// Fixed values of the `t = 0` slice, if clamped.
    pub boundary_past: Option<Vec<u8>>,
    /// Fixed values of the `t = nt - 1` slice, if clamped.
    pub boundary_future: Option<Vec<u8>>,
    /// `(u, v)` site-index pairs; spatial ring edges exist for `nx >= 2`.
    edges: Vec<(usize, usize)>,
}

impl MrfModel {
    pub fn new(
        nx: usize,
        nt: usize,
        q: usize,
        psi: Vec<f64>,
        boundary_past: Option<Vec<u8>>,
        boundary_future: Option<Vec<u8>>,
    ) -> Result<Self> {
        if nx < 1 || nt < 2 || q < 2 {
            return Err(Error::InvalidParameter(
                "need nx >= 1, nt >= 2, q >= 2".into(),
            ));
        }
        if psi.len() != q * q {
            return Err(Error::DimensionMismatch {
                expected: q * q,
                actual: psi.len(),
            });
        }
        if psi.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "edge potentials must be strictly positive".into(),
            ));
        }
        for boundary in [&boundary_past, &boundary_future].into_iter().flatten() {
            if boundary.len() != nx {
                return Err(Error::DimensionMismatch {
                    expected: nx,
                    actual: boundary.len(),
                });
            }
            if boundary.iter().any(|&s| s as usize >= q) {
                return Err(Error::InvalidParameter("boundary value out of range".into()));
            }
        }
        let mut edges = Vec::new();
        let site = |x: usize, t: usize| t * nx + x;
        if nx >= 2 {
            for t in 0..nt {
                for x in 0..nx {
                    edges.push((site(x, t), site((x + 1) % nx, t)));
                }
            }
        }
        for t in 0..nt - 1 {
            for x in 0..nx {
                edges.push((site(x, t), site(x, t + 1)));
            }
        }
        Ok(Self {
            nx,
            nt,
            q,
            psi,
            boundary_past,
            boundary_future,
            edges,
        })
    }

    /// Uniform-potential model (every free configuration equally likely).
    pub fn uniform(nx: usize, nt: usize, q: usize) -> Result<Self> {
        Self::new(nx, nt, q, vec![1.0; q * q], None, None)
    }

    /// Attractive same-state coupling `psi(s, s') = exp(j * [s == s'])`.
    pub fn attractive(
        nx: usize,
        nt: usize,
        q: usize,
        j: f64,
        boundary_past: Option<Vec<u8>>,
        boundary_future: Option<Vec<u8>>,
    ) -> Result<Self> {
        let mut psi = vec![1.0; q * q];
        for s in 0..q {
            psi[s * q + s] = j.exp();
        }
        Self::new(nx, nt, q, psi, boundary_past, boundary_future)
    }

    fn num_sites(&self) -> usize {
        self.nx * self.nt
    }

    /// Sites not pinned by a boundary clamp, in raster order.
    fn free_sites(&self) -> Vec<usize> {
        (0..self.num_sites())
            .filter(|&site| {
                let t = site / self.nx;
                !(t == 0 && self.boundary_past.is_some()
                    || t == self.nt - 1 && self.boundary_future.is_some())
            })
            .collect()
    }

    /// Write the boundary clamps into a configuration buffer.
    pub fn apply_boundaries(&self, config: &mut [u8]) {
        if let Some(past) = &self.boundary_past {
            config[..self.nx].copy_from_slice(past);
        }
        if let Some(future) = &self.boundary_future {
            config[(self.nt - 1) * self.nx..].copy_from_slice(future);
        }
    }

    /// Unnormalized Gibbs weight of a full configuration.
    fn weight(&self, config: &[u8]) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v)| self.psi[config[u] as usize * self.q + config[v] as usize])
            .product()
    }

    /// Gibbs conditional of one site given the rest: the normalized product
    /// of the potentials on its incident edges (left, right, past, future).
    pub fn site_conditional(&self, config: &[u8], site: usize) -> Vec<f64> {
        let mut weights = vec![1.0; self.q];
        for &(u, v) in &self.edges {
            if u == site {
                for (s, w) in weights.iter_mut().enumerate() {
                    *w *= self.psi[s * self.q + config[v] as usize];
                }
            } else if v == site {
                for (s, w) in weights.iter_mut().enumerate() {
                    *w *= self.psi[config[u] as usize * self.q + s];
                }
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        weights
    }
}

/// Forward-sample a Markov process trajectory.
pub fn mp_sample(model: &MpModel, seed: u64) -> LatticeSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = mp_draw(model, &mut rng);
    LatticeSample {
        values,
        sampler: "mp_forward",
        seed,
        sweeps: 0,
    }
}

fn mp_draw<R: Rng>(model: &MpModel, rng: &mut R) -> Vec<u8> {
    let (nx, nt, q) = (model.nx, model.nt, model.q);
    let mut values = vec![0u8; nx * nt];
    match &model.initial {
        SliceInit::PerSite(p) => {
            for x in 0..nx {
                values[x] = draw_from(p, rng);
            }
        }
        SliceInit::Joint(p) => {
            let mut idx = draw_from(p, rng) as usize;
            for x in 0..nx {
                values[x] = (idx % q) as u8;
                idx /= q;
            }
        }
    }
    for t in 1..nt {
        for x in 0..nx {
            let left = values[(t - 1) * nx + (x + nx - 1) % nx];
            let center = values[(t - 1) * nx + x];
            let right = values[(t - 1) * nx + (x + 1) % nx];
            let row_start = ((left as usize * q + center as usize) * q + right as usize) * q;
            let row = &model.transition[row_start..row_start + q];
            values[t * nx + x] = draw_from(row, rng);
        }
    }
    values
}

fn draw_from<R: Rng>(weights: &[f64], rng: &mut R) -> u8 {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut cum = 0.0;
    for (s, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return s as u8;
        }
    }
    (weights.len() - 1) as u8
}

/// Exact joint of a Markov process by chain-rule products over slices.
pub fn mp_exact(model: &MpModel) -> Result<JointDistribution> {
    let mut joint = JointDistribution::zeros(model.nx, model.nt, model.q)?;
    let (nx, nt) = (model.nx, model.nt);
    for idx in 0..joint.len() {
        let cfg = joint.config_of(idx);
        let mut p = model.initial_prob(&cfg[..nx]);
        't_loop: for t in 1..nt {
            for x in 0..nx {
                if p == 0.0 {
                    break 't_loop;
                }
                let left = cfg[(t - 1) * nx + (x + nx - 1) % nx];
                let center = cfg[(t - 1) * nx + x];
                let right = cfg[(t - 1) * nx + (x + 1) % nx];
                p *= model.f(left, center, right, cfg[t * nx + x]);
            }
        }
        joint.probs[idx] = p;
    }
    Ok(joint)
}

/// Empirical joint from independent forward samples.
pub fn mp_histogram(model: &MpModel, samples: usize, seed: u64) -> Result<JointDistribution> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let mut joint = JointDistribution::zeros(model.nx, model.nt, model.q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 1.0 / samples as f64;
    for _ in 0..samples {
        let values = mp_draw(model, &mut rng);
        let idx = joint.index_of(&values);
        joint.probs[idx] += w;
    }
    Ok(joint)
}

/// Exact Gibbs joint `Pr proportional to prod_edges psi` over free sites
/// given the boundaries. Returns the joint (over full configurations, with
/// clamp-violating configurations at probability zero) and the partition
/// function.
pub fn mrf_exact(model: &MrfModel) -> Result<(JointDistribution, f64)> {
    let free = model.free_sites();
    let size = (model.q as u128).pow(free.len() as u32);
    if size > ENUM_LIMIT {
        return Err(Error::EnumerationTooLarge {
            size,
            limit: ENUM_LIMIT,
        });
    }
    let mut joint = JointDistribution::zeros(model.nx, model.nt, model.q)?;
    let mut config = vec![0u8; model.num_sites()];
    model.apply_boundaries(&mut config);
    let mut partition = 0.0;
    for assignment in 0..size as usize {
        let mut rest = assignment;
        for &site in &free {
            config[site] = (rest % model.q) as u8;
            rest /= model.q;
        }
        let w = model.weight(&config);
        let idx = joint.index_of(&config);
        joint.probs[idx] = w;
        partition += w;
    }
    for p in joint.probs.iter_mut() {
        *p /= partition;
    }
    Ok((joint, partition))
}

/// Single-site Gibbs sampler: raster-order sweeps over the free sites,
/// boundary slices held fixed. Returns the configuration after
/// `burn_in + sweeps` sweeps from a seeded uniform start.
pub fn mrf_gibbs_sample(
    model: &MrfModel,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> LatticeSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = GibbsChain::new(model, &mut rng);
    for _ in 0..burn_in + sweeps {
        chain.sweep(model, &mut rng);
    }
    LatticeSample {
        values: chain.config,
        sampler: "mrf_gibbs",
        seed,
        sweeps: burn_in + sweeps,
    }
}

/// Empirical joint from one Gibbs chain: after `burn_in` sweeps, record the
/// configuration every `thin` sweeps, `samples` times.
pub fn mrf_gibbs_histogram(
    model: &MrfModel,
    samples: usize,
    thin: usize,
    burn_in: usize,
    seed: u64,
) -> Result<JointDistribution> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let thin = thin.max(1);
    let mut joint = JointDistribution::zeros(model.nx, model.nt, model.q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = GibbsChain::new(model, &mut rng);
    for _ in 0..burn_in {
        chain.sweep(model, &mut rng);
    }
    let w = 1.0 / samples as f64;
    for _ in 0..samples {
        for _ in 0..thin {
            chain.sweep(model, &mut rng);
        }
        let idx = joint.index_of(&chain.config);
        joint.probs[idx] += w;
    }
    Ok(joint)
}

struct GibbsChain {
    config: Vec<u8>,
    free: Vec<usize>,
}

impl GibbsChain {
    fn new<R: Rng>(model: &MrfModel, rng: &mut R) -> Self {
        let mut config = vec![0u8; model.num_sites()];
        let free = model.free_sites();
        for &site in &free {
            config[site] = rng.random_range(0..model.q) as u8;
        }
        model.apply_boundaries(&mut config);
        Self { config, free }
    }

    fn sweep<R: Rng>(&mut self, model: &MrfModel, rng: &mut R) {
        for &site in &self.free {
            let cond = model.site_conditional(&self.config, site);
            self.config[site] = draw_from(&cond, rng);
        }
    }
}

/// Total-variation distance between a joint and its time reflection.
#[derive(Debug, Clone)]
pub struct TimeReflectionReport {
    pub tv: f64,
}

/// Models whose exact joint can be enumerated.
pub trait ExactJoint {
    fn exact_joint(&self) -> Result<JointDistribution>;
}

impl ExactJoint for MpModel {
    fn exact_joint(&self) -> Result<JointDistribution> {
        mp_exact(self)
    }
}

impl ExactJoint for MrfModel {
    fn exact_joint(&self) -> Result<JointDistribution> {
        Ok(mrf_exact(self)?.0)
    }
}

/// Enumerate the model's joint, reflect `t -> nt - 1 - t`, and report the
/// total-variation distance between the two.
pub fn time_reflection_report<M: ExactJoint>(model: &M) -> Result<TimeReflectionReport> {
    let joint = model.exact_joint()?;
    let tv = joint.tv_distance(&joint.time_reflected())?;
    Ok(TimeReflectionReport { tv })
}

/// Outcome of fitting the best simplest-local Markov process to a target
/// joint (binary states): the `t = 0` slice law is pinned to the target's,
/// and the shared 3-parent conditional is searched over a grid, then
/// refined by coordinate descent.
#[derive(Debug, Clone)]
pub struct MpFitReport {
    /// Best total-variation distance found on the parameter grid.
    pub grid_tv: f64,
    /// Best distance after local refinement.
    pub min_tv: f64,
    /// Conditional `f(1 | parents)` at the refined optimum (8 entries,
    /// parent index `left*4 + center*2 + right`).
    pub best_transition: Vec<f64>,
    /// Number of grid candidates evaluated.
    pub candidates: usize,
}

/// Exhaustive grid search (plus refinement) over binary-state MP
/// conditionals for the closest forward factorization to `target`.
pub fn best_mp_fit(
    target: &JointDistribution,
    grid: &[f64],
    refine_rounds: usize,
) -> Result<MpFitReport> {
    if target.q != 2 {
        return Err(Error::Unsupported(
            "the MP fit search is implemented for binary states".into(),
        ));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    let (nx, nt) = (target.nx, target.nt);
    let init = target.slice_joint(0);
    let slice_count = 1usize << nx;

    // Per-configuration slice indices, computed once.
    let slice_indices: Vec<Vec<usize>> = (0..target.len())
        .map(|idx| {
            let cfg = target.config_of(idx);
            (0..nt)
                .map(|t| {
                    let mut s = 0usize;
                    for x in 0..nx {
                        s |= (cfg[t * nx + x] as usize) << x;
                    }
                    s
                })
                .collect()
        })
        .collect();

    let row_of = |s: usize, x: usize| -> usize {
        let bit = |y: usize| (s >> (y % nx)) & 1;
        (bit(x + nx - 1) << 2) | (bit(x) << 1) | bit(x + 1)
    };

    let tv_of = |p: &[f64; 8]| -> f64 {
        let mut trans = vec![1.0; slice_count * slice_count];
        for s in 0..slice_count {
            for s2 in 0..slice_count {
                let mut w = 1.0;
                for x in 0..nx {
                    let one = p[row_of(s, x)];
                    w *= if (s2 >> x) & 1 == 1 { one } else { 1.0 - one };
                }
                trans[s * slice_count + s2] = w;
            }
        }
        let mut tv = 0.0;
        for idx in 0..target.len() {
            let slices = &slice_indices[idx];
            let mut prob = init[slices[0]];
            for t in 1..nt {
                prob *= trans[slices[t - 1] * slice_count + slices[t]];
            }
            tv += (prob - target.probs()[idx]).abs();
        }
        0.5 * tv
    };

    let g = grid.len();
    let mut best = [grid[0]; 8];
    let mut best_tv = f64::INFINITY;
    let total = g.pow(8);
    let mut p = [0.0f64; 8];
    for idx in 0..total {
        let mut rest = idx;
        for slot in p.iter_mut() {
            *slot = grid[rest % g];
            rest /= g;
        }
        let tv = tv_of(&p);
        if tv < best_tv {
            best_tv = tv;
            best = p;
        }
    }
    let grid_tv = best_tv;

    // Coordinate descent with a shrinking step from the best grid point.
    let mut step = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        .min(0.25);
    for _ in 0..refine_rounds {
        let mut improved = false;
        for i in 0..8 {
            for dir in [-1.0, 1.0] {
                let mut trial = best;
                trial[i] = (trial[i] + dir * step).clamp(0.0, 1.0);
                let tv = tv_of(&trial);
                if tv < best_tv {
                    best_tv = tv;
                    best = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 {
                break;
            }
        }
    }

    Ok(MpFitReport {
        grid_tv,
        min_tv: best_tv,
        best_transition: best.to_vec(),
        candidates: total,
    })
}
