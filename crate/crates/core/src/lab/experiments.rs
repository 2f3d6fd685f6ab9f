//! The six registered experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::io::ArtifactSink;
use super::CheckSet;
use crate::error::{Error, Result};
use crate::field::{
    classical_energy, integrate, integrate_with_sources, make_initial_state, reverse_momenta,
    FieldModel, FieldState, InitialState, LatticeSpec, NoiseBlock, NoiseSpec, Potential,
    sample_noise_block,
};
use crate::fock::{FockSpec, NormalPoly};
use crate::maps::{
    amplitudes_to_field, check_energy_equivalence, q_gaussian_check, reachability_gap,
    ClassicalEnsemble, ModeAmplitudes, ModeBasis,
};
use crate::mrf::{
    best_mp_fit, mp_exact, mp_histogram, mrf_exact, mrf_gibbs_histogram, time_reflection_report,
    MpModel, MrfModel, SliceInit,
};

fn derive_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Random coherent amplitudes: both quadratures `N(0, scale^2)` per mode.
fn random_alphas(modes: usize, scale: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..modes)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
        .collect()
}

fn state_from_alphas(basis: &ModeBasis, alphas: Vec<Complex64>) -> Result<FieldState> {
    amplitudes_to_field(&ModeAmplitudes::from_alphas(basis, alphas)?, basis)
}

/// Even-power Taylor interaction of the sine-Gordon potential beyond its
/// mass term: coefficients `(-1)^{j+1} m^{4-2j} lambda^{j-1} / (2j)!` for
/// `phi^{2j}`, `j >= 2`, up to `degree`.
fn sine_gordon_interaction_taylor(m: f64, lambda: f64, degree: u32) -> Potential {
    let mut terms = Vec::new();
    let mut j = 2u32;
    while 2 * j <= degree {
        let mut fact = 1.0;
        for i in 1..=2 * j {
            fact *= i as f64;
        }
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        let coeff = sign * m.powi(4 - 2 * j as i32) * lambda.powi(j as i32 - 1) / fact;
        terms.push((2 * j, coeff));
        j += 1;
    }
    Potential::Polynomial { terms }
}

// ---------------------------------------------------------------------------
// exp_energy_equivalence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyEquivalenceConfig {
    pub seed: u64,
    pub lattice_sites: usize,
    pub lattice_spacing: f64,
    pub mass: f64,
    pub modes: usize,
    pub ensembles: usize,
    pub amplitude: f64,
    pub n_max_free: usize,
    pub lambda_phi4: f64,
    pub amplitude_phi4: f64,
    pub n_max_phi4: usize,
    pub n_max_phi4_refined: usize,
    pub sg_mass: f64,
    pub sg_lambda: f64,
    pub sg_taylor_degree: u32,
    pub sg_amplitude: f64,
    pub n_max_sg: usize,
    pub tol_vacuum: f64,
    pub tol_free: f64,
    pub tol_phi4: f64,
    pub tol_refinement_drop: f64,
    pub tol_sg: f64,
}

impl Default for EnergyEquivalenceConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            lattice_sites: 8,
            lattice_spacing: 0.5,
            mass: 1.0,
            modes: 3,
            ensembles: 10,
            amplitude: 0.3,
            n_max_free: 20,
            lambda_phi4: 0.1,
            amplitude_phi4: 0.25,
            n_max_phi4: 25,
            n_max_phi4_refined: 30,
            sg_mass: 1.0,
            sg_lambda: 1.0,
            sg_taylor_degree: 8,
            sg_amplitude: 0.15,
            n_max_sg: 12,
            tol_vacuum: 1e-12,
            tol_free: 1e-8,
            tol_phi4: 1e-6,
            tol_refinement_drop: 1e-10,
            tol_sg: 1e-6,
        }
    }
}

impl EnergyEquivalenceConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.modes < 1 || self.modes > self.lattice_sites {
            return Err(Error::InvalidParameter("modes out of range".into()));
        }
        if self.ensembles < 1 {
            return Err(Error::InvalidParameter("need >= 1 ensemble".into()));
        }
        if self.n_max_phi4_refined < self.n_max_phi4 {
            return Err(Error::InvalidParameter(
                "refined cutoff must not be smaller".into(),
            ));
        }
        for tol in [self.tol_vacuum, self.tol_free, self.tol_phi4, self.tol_sg] {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter("tolerances must be > 0".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn exp_energy_equivalence(
    c: &EnergyEquivalenceConfig,
    checks: &mut CheckSet,
    artifacts: &mut ArtifactSink,
) -> Result<()> {
    let lattice = LatticeSpec::new(c.lattice_sites, c.lattice_spacing)?;
    let mut case_rows: Vec<String> = Vec::new();
    let record = |rows: &mut Vec<String>, case: &str, n_max: usize, r: &crate::maps::EnergyEquivalenceReport| {
        rows.push(format!(
            "{case},{n_max},{:e},{:e},{:e},{:e},{:e}",
            r.lhs, r.rhs, r.abs_err, r.rel_err, r.max_truncation_tail
        ));
    };

    // Vacuum: both sides identically zero.
    let free_model = FieldModel::free(c.mass, lattice)?;
    let vacuum_basis = ModeBasis::low_momentum(&free_model, c.modes, 8)?;
    let vacuum = ClassicalEnsemble::point(FieldState::zeros(1, c.lattice_sites));
    let report = check_energy_equivalence(&vacuum, &free_model, &vacuum_basis, 0)?;
    record(&mut case_rows, "vacuum", 8, &report);
    checks.push(
        "vacuum_abs_err",
        report.abs_err,
        "<=",
        c.tol_vacuum,
        format!("lhs={:e} rhs={:e}", report.lhs, report.rhs),
    );

    // Free field: random coherent point ensembles.
    let free_basis = ModeBasis::low_momentum(&free_model, c.modes, c.n_max_free)?;
    let mut worst = 0.0_f64;
    let mut worst_note = String::new();
    for k in 0..c.ensembles {
        let alphas = random_alphas(c.modes, c.amplitude, derive_seed(c.seed, k as u64));
        let state = state_from_alphas(&free_basis, alphas)?;
        let report =
            check_energy_equivalence(&ClassicalEnsemble::point(state), &free_model, &free_basis, 0)?;
        record(&mut case_rows, &format!("free_{k}"), c.n_max_free, &report);
        if report.rel_err > worst {
            worst = report.rel_err;
            worst_note = format!(
                "lhs={:e} rhs={:e} tail={:e}",
                report.lhs, report.rhs, report.max_truncation_tail
            );
        }
    }
    checks.push("free_rel_err_max", worst, "<=", c.tol_free, worst_note);

    // phi^4 at the working cutoff and a refined one.
    let phi4_model = FieldModel::phi4(c.mass, c.lambda_phi4, lattice)?;
    let mut phi4_rel = [0.0f64; 2];
    for (slot, n_max) in [c.n_max_phi4, c.n_max_phi4_refined].into_iter().enumerate() {
        let basis = ModeBasis::low_momentum(&phi4_model, c.modes, n_max)?;
        let mut members = Vec::with_capacity(c.ensembles);
        let weight = 1.0 / c.ensembles as f64;
        for k in 0..c.ensembles {
            let alphas = random_alphas(
                c.modes,
                c.amplitude_phi4,
                derive_seed(c.seed, 1000 + k as u64),
            );
            members.push((state_from_alphas(&basis, alphas)?, weight));
        }
        let ensemble = ClassicalEnsemble::weighted(members)?;
        let report = check_energy_equivalence(&ensemble, &phi4_model, &basis, 0)?;
        record(&mut case_rows, &format!("phi4_nmax{n_max}"), n_max, &report);
        phi4_rel[slot] = report.rel_err;
    }
    checks.push("phi4_rel_err", phi4_rel[0], "<=", c.tol_phi4, String::new());
    checks.push(
        "phi4_rel_err_refined",
        phi4_rel[1],
        "<=",
        c.tol_phi4,
        String::new(),
    );
    checks.push(
        "phi4_refinement_drop",
        phi4_rel[1] - phi4_rel[0],
        "<=",
        c.tol_refinement_drop,
        "refined residual must not exceed the coarse one beyond fp noise".into(),
    );

    // Sine-Gordon, small amplitudes: the cosine interaction is polynomial-
    // expanded to a fixed even degree and that same polynomial model is used
    // on both sides, so the identity is again exact up to the cutoff.
    let sg_model = FieldModel::new(
        vec![c.sg_mass],
        sine_gordon_interaction_taylor(c.sg_mass, c.sg_lambda, c.sg_taylor_degree),
        lattice,
    )?;
    let sg_basis = ModeBasis::low_momentum(&sg_model, c.modes, c.n_max_sg)?;
    let mut members = Vec::with_capacity(c.ensembles);
    let weight = 1.0 / c.ensembles as f64;
    for k in 0..c.ensembles {
        let alphas = random_alphas(c.modes, c.sg_amplitude, derive_seed(c.seed, 2000 + k as u64));
        members.push((state_from_alphas(&sg_basis, alphas)?, weight));
    }
    let sg_ensemble = ClassicalEnsemble::weighted(members)?;
    let report = check_energy_equivalence(&sg_ensemble, &sg_model, &sg_basis, 0)?;
    record(&mut case_rows, "sine_gordon_taylor", c.n_max_sg, &report);
    checks.push(
        "sine_gordon_rel_err",
        report.rel_err,
        "<=",
        c.tol_sg,
        format!("taylor_degree={}", c.sg_taylor_degree),
    );

    artifacts.write_csv(
        "cases.csv",
        "case,n_max,lhs,rhs,abs_err,rel_err,max_truncation_tail",
        case_rows,
    )
}

// ---------------------------------------------------------------------------
// exp_reachability_gap
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachabilityGapConfig {
    pub seed: u64,
    pub lambda: f64,
    pub n_max_coarse: usize,
    pub n_max_fine: usize,
    pub restarts: usize,
    pub tol_free_gap: f64,
    pub tol_coherent_zero: f64,
    pub tol_stability: f64,
}

impl Default for ReachabilityGapConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            lambda: 0.1,
            n_max_coarse: 30,
            n_max_fine: 40,
            restarts: 16,
            tol_free_gap: 1e-9,
            tol_coherent_zero: 1e-9,
            tol_stability: 1e-6,
        }
    }
}

impl ReachabilityGapConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.n_max_fine < self.n_max_coarse {
            return Err(Error::InvalidParameter(
                "fine cutoff must not be smaller".into(),
            ));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidParameter("need >= 1 restart".into()));
        }
        Ok(())
    }
}

fn quartic_oscillator(n_max: usize, lambda: f64) -> Result<(FockSpec, crate::fock::OperatorMatrix)> {
    let fock = FockSpec::new(1, n_max)?;
    let mut poly = NormalPoly::new(1);
    poly.add_number(0, 1.0);
    poly.add_normal_q_power(0, 4, lambda);
    Ok((fock, poly.to_matrix(&fock)?))
}

pub(crate) fn exp_reachability_gap(
    c: &ReachabilityGapConfig,
    checks: &mut CheckSet,
    artifacts: &mut ArtifactSink,
) -> Result<()> {
    let mut rows = Vec::new();

    // Free-field control: harmonic mode, gap closes.
    let fock = FockSpec::new(1, c.n_max_fine)?;
    let mut free = NormalPoly::new(1);
    free.add_number(0, 1.0);
    let h_free = free.to_matrix(&fock)?;
    let control = reachability_gap(&h_free, &fock, c.restarts, c.seed)?;
    rows.push(format!(
        "free,{},{:e},{:e},{:e}",
        c.n_max_fine, control.e_quantum, control.e_coherent_min, control.gap
    ));
    checks.push(
        "free_gap_abs",
        control.gap.abs(),
        "<=",
        c.tol_free_gap,
        String::new(),
    );

    // Quartic oscillator at two cutoffs.
    let mut gaps = [0.0f64; 2];
    let mut fine = None;
    for (slot, n_max) in [c.n_max_coarse, c.n_max_fine].into_iter().enumerate() {
        let (fock, h) = quartic_oscillator(n_max, c.lambda)?;
        let report = reachability_gap(&h, &fock, c.restarts, derive_seed(c.seed, slot as u64))?;
        rows.push(format!(
            "quartic,{},{:e},{:e},{:e}",
            n_max, report.e_quantum, report.e_coherent_min, report.gap
        ));
        gaps[slot] = report.gap;
        if slot == 1 {
            fine = Some(report);
        }
    }
    let fine = fine.expect("fine cutoff evaluated");
    checks.push(
        "quartic_e_quantum",
        fine.e_quantum,
        "<",
        0.0,
        "exact diagonalization dips below the coherent floor".into(),
    );
    checks.push(
        "quartic_coherent_min_abs",
        fine.e_coherent_min.abs(),
        "<=",
        c.tol_coherent_zero,
        format!("converged={}", fine.converged),
    );
    checks.push("quartic_gap", fine.gap, ">", 0.0, String::new());
    checks.push(
        "gap_cutoff_stability",
        (gaps[1] - gaps[0]).abs(),
        "<=",
        c.tol_stability,
        format!("coarse={:e} fine={:e}", gaps[0], gaps[1]),
    );

    artifacts.write_csv("gaps.csv", "case,n_max,e_quantum,e_coherent_min,gap", rows)
}

// ---------------------------------------------------------------------------
// exp_q_gaussian
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGaussianConfig {
    pub seed: u64,
    pub probes: usize,
    pub spread: f64,
    pub n_max: usize,
    pub base_alpha_re: f64,
    pub base_alpha_im: f64,
    pub lattice_sites: usize,
    pub lattice_spacing: f64,
    pub mass: f64,
    pub modes: usize,
    pub base_amplitude_m3: f64,
    pub tol_rel_dev: f64,
    pub tol_base_probe: f64,
}

impl Default for QGaussianConfig {
    fn default() -> Self {
        Self {
            seed: 11,
            probes: 100,
            spread: 0.3,
            n_max: 20,
            base_alpha_re: 0.6,
            base_alpha_im: -0.3,
            lattice_sites: 8,
            lattice_spacing: 0.5,
            mass: 1.0,
            modes: 3,
            base_amplitude_m3: 0.4,
            tol_rel_dev: 1e-6,
            tol_base_probe: 1e-12,
        }
    }
}

impl QGaussianConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.probes < 1 {
            return Err(Error::InvalidParameter("need >= 1 probe".into()));
        }
        if !(self.spread >= 0.0) {
            return Err(Error::InvalidParameter("spread must be >= 0".into()));
        }
        Ok(())
    }
}

pub(crate) fn exp_q_gaussian(
    c: &QGaussianConfig,
    checks: &mut CheckSet,
    artifacts: &mut ArtifactSink,
) -> Result<()> {
    let mut rows = Vec::new();

    // Single mode.
    let m1_model = FieldModel::free(1.0, LatticeSpec::new(2, 1.0)?)?;
    let m1_basis = ModeBasis::new(&m1_model, &[(0, 0)], c.n_max)?;
    let base_m1 = state_from_alphas(
        &m1_basis,
        vec![Complex64::new(c.base_alpha_re, c.base_alpha_im)],
    )?;
    let base_report = q_gaussian_check(&base_m1, &m1_basis, 1, 0.0, c.seed)?;
    checks.push(
        "m1_base_probe_dev",
        base_report.max_rel_dev,
        "<=",
        c.tol_base_probe,
        String::new(),
    );
    let m1 = q_gaussian_check(&base_m1, &m1_basis, c.probes, c.spread, c.seed)?;
    rows.push(format!("1,{},{:e}", m1.probes, m1.max_rel_dev));
    checks.push("m1_max_rel_dev", m1.max_rel_dev, "<=", c.tol_rel_dev, String::new());

    // Three modes on a projected lattice basis.
    let m3_model = FieldModel::free(c.mass, LatticeSpec::new(c.lattice_sites, c.lattice_spacing)?)?;
    let m3_basis = ModeBasis::low_momentum(&m3_model, c.modes, c.n_max)?;
    let base_alphas = random_alphas(c.modes, c.base_amplitude_m3, derive_seed(c.seed, 1));
    let base_m3 = state_from_alphas(&m3_basis, base_alphas)?;
    let m3 = q_gaussian_check(&base_m3, &m3_basis, c.probes, c.spread, derive_seed(c.seed, 2))?;
    rows.push(format!("{},{},{:e}", c.modes, m3.probes, m3.max_rel_dev));
    checks.push("m3_max_rel_dev", m3.max_rel_dev, "<=", c.tol_rel_dev, String::new());

    artifacts.write_csv("runs.csv", "modes,probes,max_rel_dev", rows)
}

// ---------------------------------------------------------------------------
// exp_soliton_mass
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonMassConfig {
    pub seed: u64,
    pub mass: f64,
    pub lambda: f64,
    /// Lattice half-width in units of 1/mass.
    pub half_span: f64,
    pub spacing_coarse: f64,
    pub spacing_fine: f64,
    pub scaling_lambdas: Vec<f64>,
    pub translate_sites: usize,
    pub tol_coarse: f64,
    pub tol_fine: f64,
    pub min_convergence_order: f64,
    pub tol_scaling: f64,
    pub tol_translation: f64,
}

impl Default for SolitonMassConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mass: 1.0,
            lambda: 1.0,
            half_span: 10.0,
            spacing_coarse: 0.05,
            spacing_fine: 0.025,
            scaling_lambdas: vec![0.5, 1.0, 2.0],
            translate_sites: 17,
            tol_coarse: 0.01,
            tol_fine: 0.0025,
            min_convergence_order: 1.8,
            tol_scaling: 1e-10,
            tol_translation: 1e-6,
        }
    }
}

impl SolitonMassConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.spacing_fine < self.spacing_coarse) {
            return Err(Error::InvalidParameter(
                "fine spacing must be below coarse".into(),
            ));
        }
        if self.scaling_lambdas.is_empty() {
            return Err(Error::InvalidParameter("need scaling lambdas".into()));
        }
        Ok(())
    }
}

fn kink_energy(m: f64, lambda: f64, spacing: f64, half_span: f64) -> Result<(f64, usize)> {
    let sites = (2.0 * half_span / m / spacing).round() as usize;
    let model = FieldModel::sine_gordon(m, lambda, LatticeSpec::new(sites, spacing)?)?;
    let center = 0.5 * sites as f64 * spacing;
    let kink = make_initial_state(&InitialState::Kink { center }, &model)?;
    Ok((classical_energy(&kink, &model)?, sites))
}

pub(crate) fn exp_soliton_mass(
    c: &SolitonMassConfig,
    checks: &mut CheckSet,
    artifacts: &mut ArtifactSink,
) -> Result<()> {
    let exact = 8.0 * c.mass.powi(3) / c.lambda;
    let mut kink_rows = Vec::new();
    let mut rel_errs = [0.0f64; 2];
    for (slot, spacing) in [c.spacing_coarse, c.spacing_fine].into_iter().enumerate() {
        let (e, sites) = kink_energy(c.mass, c.lambda, spacing, c.half_span)?;
        let rel = ((e - exact) / exact).abs();
        kink_rows.push(format!("{spacing},{sites},{e:e},{exact:e},{rel:e}"));
        rel_errs[slot] = rel;
    }
    checks.push("kink_rel_err_coarse", rel_errs[0], "<=", c.tol_coarse, String::new());
    checks.push("kink_rel_err_fine", rel_errs[1], "<=", c.tol_fine, String::new());
    let order = (rel_errs[0] / rel_errs[1]).log2()
        / (c.spacing_coarse / c.spacing_fine).log2();
    checks.push(
        "convergence_order",
        order,
        ">=",
        c.min_convergence_order,
        format!("coarse={:e} fine={:e}", rel_errs[0], rel_errs[1]),
    );

    // Exact classical scaling: E(lambda) * lambda is constant.
    let mut scaling_rows = Vec::new();
    let mut products = Vec::new();
    for &lambda in &c.scaling_lambdas {
        let (e, _) = kink_energy(c.mass, lambda, c.spacing_coarse, c.half_span)?;
        scaling_rows.push(format!("{lambda},{e:e},{:e}", e * lambda));
        products.push(e * lambda);
    }
    let reference = products[0];
    let max_dev = products
        .iter()
        .map(|p| ((p - reference) / reference).abs())
        .fold(0.0_f64, f64::max);
    checks.push("lambda_scaling_rel_dev", max_dev, "<=", c.tol_scaling, String::new());

    // Translation invariance (whole lattice sites).
    let sites = (2.0 * c.half_span / c.mass / c.spacing_coarse).round() as usize;
    let model = FieldModel::sine_gordon(
        c.mass,
        c.lambda,
        LatticeSpec::new(sites, c.spacing_coarse)?,
    )?;
    let center = 0.5 * sites as f64 * c.spacing_coarse;
    let kink = make_initial_state(&InitialState::Kink { center }, &model)?;
    let e0 = classical_energy(&kink, &model)?;
    let e1 = classical_energy(&kink.translated(c.translate_sites), &model)?;
    checks.push(
        "translation_rel_dev",
        ((e1 - e0) / e0).abs(),
        "<=",
        c.tol_translation,
        format!("shift={} sites", c.translate_sites),
    );

    artifacts.write_csv("kink.csv", "spacing,sites,energy,exact,rel_err", kink_rows)?;
    artifacts.write_csv("scaling.csv", "lambda,energy,energy_times_lambda", scaling_rows)
}

// ---------------------------------------------------------------------------
// exp_mrf_vs_mp
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MrfVsMpConfig {
    pub seed: u64,
    pub nx: usize,
    pub nt: usize,
    pub samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// `f(1 | parents)` per parent combination (length 8) of the mixing
    /// Markov process under test.
    pub mp_p_one: Vec<f64>,
    /// Per-site initial law of the Markov process (length 2).
    pub mp_init: Vec<f64>,
    /// Attractive coupling of the symmetric field.
    pub coupling: f64,
    /// Coupling of the future-clamped counterexample field.
    pub coupling_counterexample: f64,
    pub fit_grid: Vec<f64>,
    pub fit_refine_rounds: usize,
    pub tol_sampler_tv: f64,
    pub tol_reflection: f64,
    pub min_asymmetry_tv: f64,
    pub min_fit_tv: f64,
}

impl Default for MrfVsMpConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            nx: 3,
            nt: 3,
            samples: 1_000_000,
            burn_in: 1000,
            thin: 3,
            mp_p_one: vec![0.15, 0.23, 0.31, 0.39, 0.47, 0.55, 0.63, 0.71],
            mp_init: vec![0.7, 0.3],
            coupling: 0.5,
            coupling_counterexample: 0.8,
            fit_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            fit_refine_rounds: 500,
            tol_sampler_tv: 0.02,
            tol_reflection: 1e-12,
            min_asymmetry_tv: 1e-6,
            min_fit_tv: 1e-4,
        }
    }
}

impl MrfVsMpConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.mp_p_one.len() != 8 {
            return Err(Error::InvalidParameter("mp_p_one must have 8 entries".into()));
        }
        if self.mp_p_one.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("mp_p_one entries must be in [0,1]".into()));
        }
        if self.mp_init.len() != 2 {
            return Err(Error::InvalidParameter("mp_init must have 2 entries".into()));
        }
        if self.samples < 1 {
            return Err(Error::InvalidParameter("need >= 1 sample".into()));
        }
        Ok(())
    }

    fn mp_model(&self) -> Result<MpModel> {
        let mut transition = Vec::with_capacity(32);
        for &p1 in &self.mp_p_one {
            transition.push(1.0 - p1);
            transition.push(p1);
        }
        MpModel::new(
            self.nx,
            self.nt,
            2,
            transition,
            SliceInit::PerSite(self.mp_init.clone()),
        )
    }
}

pub(crate) fn exp_mrf_vs_mp(
    c: &MrfVsMpConfig,
    checks: &mut CheckSet,
    artifacts: &mut ArtifactSink,
) -> Result<()> {
    // Markov process sampler vs. exact chain-rule joint.
    let mp = c.mp_model()?;
    let mp_joint = mp_exact(&mp)?;
    let mp_hist = mp_histogram(&mp, c.samples, c.seed)?;
    checks.push(
        "mp_sampler_tv",
        mp_joint.tv_distance(&mp_hist)?,
        "<=",
        c.tol_sampler_tv,
        format!("samples={}", c.samples),
    );

    // Gibbs sampler vs. exact enumeration on the symmetric field.
    let mrf = MrfModel::attractive(c.nx, c.nt, 2, c.coupling, None, None)?;
    let (mrf_joint, _z) = mrf_exact(&mrf)?;
    let mrf_hist =
        mrf_gibbs_histogram(&mrf, c.samples, c.thin, c.burn_in, derive_seed(c.seed, 1))?;
    checks.push(
        "mrf_gibbs_tv",
        mrf_joint.tv_distance(&mrf_hist)?,
        "<=",
        c.tol_sampler_tv,
        format!("samples={} thin={}", c.samples, c.thin),
    );

    // Time reflection: symmetric field exact zero; forward process and
    // boundary-asymmetric field strictly positive.
    checks.push(
        "mrf_reflection_tv",
        time_reflection_report(&mrf)?.tv,
        "<=",
        c.tol_reflection,
        String::new(),
    );
    checks.push(
        "mp_reflection_tv",
        time_reflection_report(&mp)?.tv,
        ">=",
        c.min_asymmetry_tv,
        "forward factorization with non-uniform start".into(),
    );
    let asym = MrfModel::attractive(
        c.nx,
        c.nt,
        2,
        c.coupling,
        Some(vec![0; c.nx]),
        Some(vec![1; c.nx]),
    )?;
    checks.push(
        "mrf_asym_boundary_reflection_tv",
        time_reflection_report(&asym)?.tv,
        ">=",
        c.min_asymmetry_tv,
        "asymmetry from boundaries, not dynamics".into(),
    );

    // Counterexample: a future-clamped field whose joint no simplest local
    // forward process matches, searched exhaustively on a grid then refined.
    let counter = MrfModel::attractive(
        c.nx,
        c.nt,
        2,
        c.coupling_counterexample,
        None,
        Some(vec![1; c.nx]),
    )?;
    let (counter_joint, _) = mrf_exact(&counter)?;
    let fit = best_mp_fit(&counter_joint, &c.fit_grid, c.fit_refine_rounds)?;
    checks.push(
        "mp_fit_min_tv",
        fit.min_tv,
        ">=",
        c.min_fit_tv,
        format!("grid_tv={:e} candidates={}", fit.grid_tv, fit.candidates),
    );

    let joint_rows = |joint: &crate::mrf::JointDistribution| -> Vec<String> {
        joint
            .probs()
            .iter()
            .enumerate()
            .map(|(idx, p)| format!("{idx},{p:e}"))
            .collect()
    };
    artifacts.write_csv(
        "mp_exact.csv",
        "configuration_index,probability",
        joint_rows(&mp_joint),
    )?;
    artifacts.write_csv(
        "mrf_exact.csv",
        "configuration_index,probability",
        joint_rows(&mrf_joint),
    )?;
    artifacts.write_csv(
        "counterexample_exact.csv",
        "configuration_index,probability",
        joint_rows(&counter_joint),
    )
}

// ---------------------------------------------------------------------------
// exp_noise_ensemble
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseEnsembleConfig {
    pub seed: u64,
    pub lattice_sites: usize,
    pub lattice_spacing: f64,
    /// Field mass; zero decouples the momentum zero mode into an exact
    /// random walk under white forcing.
    pub mass: f64,
    /// Source covariance (single driven component).
    pub sigma: f64,
    pub dt: f64,
    pub steps: usize,
    pub realizations: usize,
    pub sample_every: usize,
    pub control_sigma: f64,
    pub control_steps: usize,
    pub min_r_squared: f64,
    pub tol_slope_rel: f64,
    pub tol_replay: f64,
    pub max_mean_sigmas: f64,
}

impl Default for NoiseEnsembleConfig {
    fn default() -> Self {
        Self {
            seed: 99,
            lattice_sites: 16,
            lattice_spacing: 0.5,
            mass: 0.0,
            sigma: 1e-3,
            dt: 0.01,
            steps: 2000,
            realizations: 500,
            sample_every: 50,
            control_sigma: 0.3,
            control_steps: 200,
            min_r_squared: 0.99,
            tol_slope_rel: 0.25,
            tol_replay: 1e-8,
            max_mean_sigmas: 5.0,
        }
    }
}

impl NoiseEnsembleConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.realizations < 2 {
            return Err(Error::InvalidParameter("need >= 2 realizations".into()));
        }
        if self.sample_every == 0 || self.sample_every > self.steps {
            return Err(Error::InvalidParameter("bad sample_every".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidParameter("sigma must be >= 0".into()));
        }
        Ok(())
    }
}

pub(crate) fn exp_noise_ensemble(
    c: &NoiseEnsembleConfig,
    checks: &mut CheckSet,
    artifacts: &mut ArtifactSink,
) -> Result<()> {
    let lattice = LatticeSpec::new(c.lattice_sites, c.lattice_spacing)?;
    let model = FieldModel::free(c.mass, lattice)?;

    // Zero covariance reproduces the deterministic integrator bitwise.
    let control_init = make_initial_state(
        &InitialState::GaussianRandom {
            sigma: c.control_sigma,
            seed: derive_seed(c.seed, 1),
        },
        &model,
    )?;
    let zero_block = NoiseBlock::zero(vec![0], &lattice, c.control_steps);
    let noisy = integrate_with_sources(&control_init, &model, &zero_block, c.dt)?;
    let plain = integrate(&control_init, &model, c.control_steps, c.dt)?;
    let mismatches = noisy
        .iter()
        .zip(plain.iter())
        .filter(|(a, b)| a != b)
        .count();
    checks.push(
        "zero_noise_bitwise_mismatches",
        mismatches as f64,
        "<=",
        0.0,
        format!("{} steps compared", c.control_steps),
    );

    // Zero-mode variance: under white forcing the lattice-mean momentum of
    // a massless field performs an exact random walk with
    // Var[pi_bar](t) = sigma * t / (L a).
    let spec_sigma = nalgebra::DMatrix::from_element(1, 1, c.sigma);
    let n_samples = c.steps / c.sample_every;
    let mut sums = vec![0.0f64; n_samples];
    let mut sq_sums = vec![0.0f64; n_samples];
    let mut mean_phi_sum = 0.0f64;
    let mut mean_phi_sq_sum = 0.0f64;
    let vacuum = FieldState::zeros(1, c.lattice_sites);
    for r in 0..c.realizations {
        let noise_spec = NoiseSpec::new(vec![0], spec_sigma.clone(), derive_seed(c.seed, 100 + r as u64))?;
        let block = sample_noise_block(&noise_spec, &lattice, c.steps, c.dt)?;
        let traj = integrate_with_sources(&vacuum, &model, &block, c.dt)?;
        for (i, sample) in (1..=n_samples).enumerate() {
            let state = &traj[sample * c.sample_every];
            let pi_bar: f64 =
                state.pi[0].iter().sum::<f64>() / c.lattice_sites as f64;
            sums[i] += pi_bar;
            sq_sums[i] += pi_bar * pi_bar;
        }
        let phi_bar: f64 = traj[c.steps].phi[0].iter().sum::<f64>() / c.lattice_sites as f64;
        mean_phi_sum += phi_bar;
        mean_phi_sq_sum += phi_bar * phi_bar;
    }
    let r = c.realizations as f64;
    let times: Vec<f64> = (1..=n_samples)
        .map(|i| (i * c.sample_every) as f64 * c.dt)
        .collect();
    let variances: Vec<f64> = (0..n_samples)
        .map(|i| {
            let mean = sums[i] / r;
            (sq_sums[i] / r - mean * mean).max(0.0)
        })
        .collect();
    let (slope, intercept, r_squared) = linear_fit(&times, &variances);
    let analytic_slope = c.sigma / (c.lattice_sites as f64 * c.lattice_spacing);
    checks.push(
        "zero_mode_variance_r2",
        r_squared,
        ">=",
        c.min_r_squared,
        format!("slope={slope:e} intercept={intercept:e}"),
    );
    checks.push(
        "zero_mode_slope_rel_err",
        ((slope - analytic_slope) / analytic_slope).abs(),
        "<=",
        c.tol_slope_rel,
        format!("analytic={analytic_slope:e}"),
    );

    // Ensemble-mean field stays at zero within Monte Carlo error.
    let mean_phi = mean_phi_sum / r;
    let var_phi = (mean_phi_sq_sum / r - mean_phi * mean_phi).max(0.0);
    let stderr = (var_phi / r).sqrt().max(1e-300);
    checks.push(
        "ensemble_mean_field_sigmas",
        mean_phi.abs() / stderr,
        "<=",
        c.max_mean_sigmas,
        format!("mean={mean_phi:e} stderr={stderr:e}"),
    );

    // Reversed replay: run one noisy realization forward, flip momenta,
    // replay the time-reversed block, flip back, compare to the start.
    let replay_init = control_init.clone();
    let noise_spec = NoiseSpec::new(vec![0], spec_sigma.clone(), derive_seed(c.seed, 2))?;
    let block = sample_noise_block(&noise_spec, &lattice, c.steps, c.dt)?;
    let forward = integrate_with_sources(&replay_init, &model, &block, c.dt)?;
    let back = integrate_with_sources(
        &reverse_momenta(forward.last().expect("nonempty")),
        &model,
        &block.time_reversed(),
        c.dt,
    )?;
    let recovered = reverse_momenta(back.last().expect("nonempty"));
    let mut max_err = 0.0f64;
    for j in 0..replay_init.components() {
        for x in 0..replay_init.sites() {
            max_err = max_err
                .max((recovered.phi[j][x] - replay_init.phi[j][x]).abs())
                .max((recovered.pi[j][x] - replay_init.pi[j][x]).abs());
        }
    }
    checks.push("reversed_replay_max_err", max_err, "<=", c.tol_replay, String::new());

    // Data files: per-site control trajectory, summarized noisy energies,
    // and the variance series.
    if let Some(dir) = artifacts_dir(artifacts) {
        super::io::write_trajectory_csv(&dir.join("control_trajectory.csv"), &plain, c.dt)?;
        super::io::write_energy_csv(&dir.join("noisy_energy.csv"), &forward, &model, c.dt)?;
    }
    artifacts.write_csv(
        "variance.csv",
        "t,var_pi_zero_mode,fit",
        times
            .iter()
            .zip(variances.iter())
            .map(|(t, v)| format!("{t},{v:e},{:e}", slope * t + intercept)),
    )
}

fn artifacts_dir(artifacts: &ArtifactSink) -> Option<std::path::PathBuf> {
    artifacts.dir_path()
}

/// Least-squares line fit returning `(slope, intercept, r_squared)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&xi, &yi)| {
            let fit = slope * xi + intercept;
            (yi - fit) * (yi - fit)
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r_squared)
}
