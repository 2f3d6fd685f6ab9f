//! Manifest and CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::field::{classical_energy, FieldModel, Trajectory};

use super::RunManifest;

/// Writes experiment artifacts into an output directory, or swallows them
/// when no directory was requested.
pub(crate) struct ArtifactSink {
    dir: Option<PathBuf>,
}

impl ArtifactSink {
    pub(crate) fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
        })
    }

    pub(crate) fn dir_path(&self) -> Option<PathBuf> {
        self.dir.clone()
    }

    /// Write a CSV file: a header line plus rows.
    pub(crate) fn write_csv(
        &mut self,
        name: &str,
        header: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        fs::write(dir.join(name), text)?;
        Ok(())
    }

    pub(crate) fn write_manifest(&mut self, manifest: &RunManifest) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        fs::write(dir.join("manifest.json"), manifest.to_json_pretty()?)?;
        let rows: Vec<String> = manifest
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{},{:e},{},{:e},{}",
                    c.name, c.measured, c.rule, c.threshold, c.passed
                )
            })
            .collect();
        self.write_csv("checks.csv", "check,measured,rule,threshold,passed", rows)
    }
}

/// Full per-site trajectory export: `step,t,site,component,phi,pi`.
pub fn write_trajectory_csv(
    path: &Path,
    trajectory: &Trajectory,
    dt: f64,
) -> std::io::Result<()> {
    let mut text = String::from("step,t,site,component,phi,pi\n");
    for (step, state) in trajectory.iter().enumerate() {
        let t = step as f64 * dt;
        for j in 0..state.components() {
            for x in 0..state.sites() {
                text.push_str(&format!(
                    "{step},{t:.6},{x},{j},{:e},{:e}\n",
                    state.phi[j][x], state.pi[j][x]
                ));
            }
        }
    }
    fs::write(path, text)
}

/// Summarized trajectory export: `step,t,energy`.
pub fn write_energy_csv(
    path: &Path,
    trajectory: &Trajectory,
    model: &FieldModel,
    dt: f64,
) -> Result<()> {
    let mut text = String::from("step,t,energy\n");
    for (step, state) in trajectory.iter().enumerate() {
        let t = step as f64 * dt;
        let e = classical_energy(state, model)?;
        text.push_str(&format!("{step},{t:.6},{e:e}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}
