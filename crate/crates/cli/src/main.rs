//! `phaselab`: run, list, and validate the registered experiments.
//!
//! Exit codes: 0 when every check in the run manifest passed, 1 when the
//! run completed but a check failed, 2 for usage or configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use phaselab_core::lab::{run_experiment, ExperimentConfig, RunManifest, EXPERIMENT_IDS};

#[derive(Parser)]
#[command(name = "phaselab", version, about = "Phase-space laboratory experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config and write its manifest.
    Run {
        /// Registered experiment id (see `phaselab list`).
        experiment: String,
        /// Config file; must declare the same experiment id.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing). Default: results/EXPERIMENT.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's seed; echoed in the manifest.
        #[arg(long)]
        seed: Option<u64>,
        /// Print every check line, not only failures.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Print the registered experiment ids.
    List,
    /// Parse and validate a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for id in EXPERIMENT_IDS {
                println!("{id}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config) {
            Ok(parsed) => {
                println!("ok: {}", parsed.id());
                ExitCode::SUCCESS
            }
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            experiment,
            config,
            out,
            seed,
            verbose,
        } => match run(&experiment, &config, out, seed, verbose) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        },
    }
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    // Two-stage parse: syntax errors keep toml's line/column spans, field
    // errors get the offending key path prepended.
    let mut table: toml::Table = toml::from_str(&text)
        .map_err(|e| anyhow::anyhow!("parsing config {}:\n{e}", path.display()))?;
    let Some(id) = table.remove("experiment").and_then(|v| v.as_str().map(String::from))
    else {
        bail!(
            "config {} must set `experiment` to one of:\n  {}",
            path.display(),
            EXPERIMENT_IDS.join("\n  ")
        );
    };
    fn fields<T: serde::de::DeserializeOwned>(table: toml::Table, path: &Path) -> anyhow::Result<T> {
        serde_path_to_error::deserialize(toml::Value::Table(table))
            .map_err(|e| anyhow::anyhow!("parsing config {}: {e}", path.display()))
    }
    let parsed = match id.as_str() {
        "exp_energy_equivalence" => ExperimentConfig::EnergyEquivalence(fields(table, path)?),
        "exp_reachability_gap" => ExperimentConfig::ReachabilityGap(fields(table, path)?),
        "exp_q_gaussian" => ExperimentConfig::QGaussian(fields(table, path)?),
        "exp_soliton_mass" => ExperimentConfig::SolitonMass(fields(table, path)?),
        "exp_mrf_vs_mp" => ExperimentConfig::MrfVsMp(fields(table, path)?),
        "exp_noise_ensemble" => ExperimentConfig::NoiseEnsemble(fields(table, path)?),
        other => bail!(
            "config {} names unknown experiment `{other}`; registered ids:\n  {}",
            path.display(),
            EXPERIMENT_IDS.join("\n  ")
        ),
    };
    parsed
        .validate()
        .with_context(|| format!("validating config {}", path.display()))?;
    Ok(parsed)
}

fn run(
    experiment: &str,
    config_path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    verbose: bool,
) -> anyhow::Result<bool> {
    if !EXPERIMENT_IDS.contains(&experiment) {
        bail!(
            "unknown experiment `{experiment}`; registered ids:\n  {}",
            EXPERIMENT_IDS.join("\n  ")
        );
    }
    let mut config = load_config(config_path)?;
    if config.id() != experiment {
        bail!(
            "config {} is for `{}`, but `{}` was requested",
            config_path.display(),
            config.id(),
            experiment
        );
    }
    if let Some(seed) = seed {
        config.set_seed(seed);
    }
    let out_dir = out.unwrap_or_else(|| PathBuf::from("results").join(experiment));
    let manifest = run_experiment(&config, Some(&out_dir))?;
    report(&manifest, verbose);
    println!(
        "{}: {} ({} checks, manifest in {})",
        manifest.experiment,
        if manifest.all_passed { "PASS" } else { "FAIL" },
        manifest.checks.len(),
        out_dir.display()
    );
    Ok(manifest.all_passed)
}

fn report(manifest: &RunManifest, verbose: bool) {
    for check in &manifest.checks {
        if verbose || !check.passed {
            println!(
                "  [{}] {}: {:e} {} {:e}{}",
                if check.passed { "pass" } else { "FAIL" },
                check.name,
                check.measured,
                check.rule,
                check.threshold,
                if check.note.is_empty() {
                    String::new()
                } else {
                    format!("  ({})", check.note)
                }
            );
        }
    }
}
