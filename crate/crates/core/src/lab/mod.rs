//! Named, reproducible experiments.
//!
//! Each experiment takes an explicit config (every physical parameter and
//! every tolerance spelled out), runs its checks against oracles computed
//! in-line, and produces a [`RunManifest`] listing one entry per check with
//! the measured value, the threshold, and the verdict. Manifests are
//! bit-reproducible from `(config, seed)` except for the wall-clock field.

mod experiments;
mod io;

pub use experiments::{
    EnergyEquivalenceConfig, MrfVsMpConfig, NoiseEnsembleConfig, QGaussianConfig,
    ReachabilityGapConfig, SolitonMassConfig,
};
pub use io::{write_energy_csv, write_trajectory_csv};

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The registered experiment ids, in `list` order.
pub const EXPERIMENT_IDS: [&str; 6] = [
    "exp_energy_equivalence",
    "exp_reachability_gap",
    "exp_q_gaussian",
    "exp_soliton_mass",
    "exp_mrf_vs_mp",
    "exp_noise_ensemble",
];

/// One executed check: measured value vs threshold under a comparison rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    /// `"<="`, `"<"`, `">="`, or `">"`: how `measured` must compare to
    /// `threshold` to pass.
    pub rule: String,
    pub passed: bool,
    /// Context values (auxiliary measurements), if any.
    pub note: String,
}

impl CheckResult {
    fn evaluate(name: &str, measured: f64, rule: &str, threshold: f64, note: String) -> Self {
        let passed = match rule {
            "<=" => measured <= threshold,
            "<" => measured < threshold,
            ">=" => measured >= threshold,
            ">" => measured > threshold,
            other => panic!("unknown comparison rule {other}"),
        } && measured.is_finite();
        Self {
            name: name.to_string(),
            measured,
            threshold,
            rule: rule.to_string(),
            passed,
            note,
        }
    }
}

/// Collects checks for a manifest; experiments push every configured check,
/// pass or fail.
#[derive(Debug, Default)]
pub(crate) struct CheckSet {
    checks: Vec<CheckResult>,
}

impl CheckSet {
    fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(
        &mut self,
        name: &str,
        measured: f64,
        rule: &str,
        threshold: f64,
        note: String,
    ) {
        self.checks
            .push(CheckResult::evaluate(name, measured, rule, threshold, note));
    }
}

/// Structured record of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
    /// Wall-clock milliseconds; the only field allowed to differ between
    /// identically-seeded runs.
    pub wall_ms: u64,
}

impl RunManifest {
    /// The manifest as JSON with the timing field zeroed, for
    /// reproducibility comparisons.
    pub fn comparable(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("manifest serializes");
        value["wall_ms"] = serde_json::Value::from(0u64);
        value
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Validated configuration of one registered experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment")]
pub enum ExperimentConfig {
    #[serde(rename = "exp_energy_equivalence")]
    EnergyEquivalence(EnergyEquivalenceConfig),
    #[serde(rename = "exp_reachability_gap")]
    ReachabilityGap(ReachabilityGapConfig),
    #[serde(rename = "exp_q_gaussian")]
    QGaussian(QGaussianConfig),
    #[serde(rename = "exp_soliton_mass")]
    SolitonMass(SolitonMassConfig),
    #[serde(rename = "exp_mrf_vs_mp")]
    MrfVsMp(MrfVsMpConfig),
    #[serde(rename = "exp_noise_ensemble")]
    NoiseEnsemble(NoiseEnsembleConfig),
}

impl ExperimentConfig {
    pub fn id(&self) -> &'static str {
        match self {
            Self::EnergyEquivalence(_) => "exp_energy_equivalence",
            Self::ReachabilityGap(_) => "exp_reachability_gap",
            Self::QGaussian(_) => "exp_q_gaussian",
            Self::SolitonMass(_) => "exp_soliton_mass",
            Self::MrfVsMp(_) => "exp_mrf_vs_mp",
            Self::NoiseEnsemble(_) => "exp_noise_ensemble",
        }
    }

    /// Reference configuration of a registered experiment.
    pub fn default_for(id: &str) -> Result<Self> {
        match id {
            "exp_energy_equivalence" => Ok(Self::EnergyEquivalence(Default::default())),
            "exp_reachability_gap" => Ok(Self::ReachabilityGap(Default::default())),
            "exp_q_gaussian" => Ok(Self::QGaussian(Default::default())),
            "exp_soliton_mass" => Ok(Self::SolitonMass(Default::default())),
            "exp_mrf_vs_mp" => Ok(Self::MrfVsMp(Default::default())),
            "exp_noise_ensemble" => Ok(Self::NoiseEnsemble(Default::default())),
            other => Err(Error::UnknownExperiment(other.to_string())),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Self::EnergyEquivalence(c) => c.seed,
            Self::ReachabilityGap(c) => c.seed,
            Self::QGaussian(c) => c.seed,
            Self::SolitonMass(c) => c.seed,
            Self::MrfVsMp(c) => c.seed,
            Self::NoiseEnsemble(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Self::EnergyEquivalence(c) => c.seed = seed,
            Self::ReachabilityGap(c) => c.seed = seed,
            Self::QGaussian(c) => c.seed = seed,
            Self::SolitonMass(c) => c.seed = seed,
            Self::MrfVsMp(c) => c.seed = seed,
            Self::NoiseEnsemble(c) => c.seed = seed,
        }
    }

    /// Shallow sanity validation of sizes and tolerances.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::EnergyEquivalence(c) => c.validate(),
            Self::ReachabilityGap(c) => c.validate(),
            Self::QGaussian(c) => c.validate(),
            Self::SolitonMass(c) => c.validate(),
            Self::MrfVsMp(c) => c.validate(),
            Self::NoiseEnsemble(c) => c.validate(),
        }
    }
}

/// Run an experiment; when `out_dir` is given, write `manifest.json`,
/// `checks.csv`, and the experiment's data CSVs there (creating the
/// directory if needed). The manifest is returned either way.
pub fn run_experiment(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    let mut checks = CheckSet::new();
    let mut artifacts = io::ArtifactSink::new(out_dir)?;
    match config {
        ExperimentConfig::EnergyEquivalence(c) => {
            experiments::exp_energy_equivalence(c, &mut checks, &mut artifacts)?
        }
        ExperimentConfig::ReachabilityGap(c) => {
            experiments::exp_reachability_gap(c, &mut checks, &mut artifacts)?
        }
        ExperimentConfig::QGaussian(c) => {
            experiments::exp_q_gaussian(c, &mut checks, &mut artifacts)?
        }
        ExperimentConfig::SolitonMass(c) => {
            experiments::exp_soliton_mass(c, &mut checks, &mut artifacts)?
        }
        ExperimentConfig::MrfVsMp(c) => {
            experiments::exp_mrf_vs_mp(c, &mut checks, &mut artifacts)?
        }
        ExperimentConfig::NoiseEnsemble(c) => {
            experiments::exp_noise_ensemble(c, &mut checks, &mut artifacts)?
        }
    }
    let all_passed = checks.checks.iter().all(|c| c.passed);
    let manifest = RunManifest {
        experiment: config.id().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed(),
        config: serde_json::to_value(config)?,
        checks: checks.checks,
        all_passed,
        wall_ms: started.elapsed().as_millis() as u64,
    };
    artifacts.write_manifest(&manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_covers_all_ids() {
        for id in EXPERIMENT_IDS {
            let config = ExperimentConfig::default_for(id).unwrap();
            assert_eq!(config.id(), id);
            config.validate().unwrap();
        }
        assert!(ExperimentConfig::default_for("exp_bogus").is_err());
    }

    #[test]
    fn seed_override_round_trips() {
        let mut config = ExperimentConfig::default_for("exp_soliton_mass").unwrap();
        config.set_seed(777);
        assert_eq!(config.seed(), 777);
    }

    #[test]
    fn comparable_view_masks_timing() {
        let manifest = RunManifest {
            experiment: "x".into(),
            version: "0".into(),
            seed: 0,
            config: serde_json::Value::Null,
            checks: vec![],
            all_passed: true,
            wall_ms: 123,
        };
        assert_eq!(manifest.comparable()["wall_ms"], 0);
    }
}
