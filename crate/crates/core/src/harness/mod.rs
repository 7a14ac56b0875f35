//! Experiment orchestration behind the `qaixi` CLI. Every command is a
//! deterministic function of its configuration and master seed, and
//! writes its CSV/JSON outputs into `ExperimentConfig::out`.

mod chsh;
mod classes;
mod converge;
mod ks;
mod run;

pub use chsh::{cmd_chsh, ChshReport};
pub use classes::{
    chsh_class, commuting_class, commuting_specs, convergence_class, convergence_specs,
    deterministic_class, write_builtin_classes, CHSH_TRUTH, CONVERGENCE_TRUTH,
};
pub use converge::{cmd_converge, log_log_slope, ConvergencePoint, ConvergenceReport};
pub use ks::{cmd_ks, KsReport};
pub use run::{cmd_run, cmd_value, HistoryFile, RunReport, ValueReport};

use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agent::{PlanningConfig, Policy};
use crate::env::{load_class_dir, EnvironmentModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Converge,
    Chsh,
    Ks,
    Value,
    Run,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Directory of environment JSON files; each command has a built-in
    /// default class.
    pub class_dir: Option<PathBuf>,
    pub truth: Option<String>,
    pub episodes: usize,
    pub cycles: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// `None` picks the command's default.
    pub policy: Option<Policy>,
    /// History to condition on before planning (`value`).
    pub history: Option<PathBuf>,
    /// Projector-set JSON for `ks`.
    pub ks_set: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `kind`: 200 episodes of 500 cycles, horizon 3, γ = 0.9.
    pub fn new(kind: ExperimentKind, seed: u64, out: impl Into<PathBuf>) -> Self {
        Self {
            kind,
            class_dir: None,
            truth: None,
            episodes: 200,
            cycles: 500,
            horizon: 3,
            gamma: 0.9,
            seed,
            out: out.into(),
            policy: None,
            history: None,
            ks_set: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("--episodes must be at least 1".into()));
        }
        if self.cycles == 0 {
            return Err(Error::Config("--cycles must be at least 1".into()));
        }
        Ok(())
    }

    fn planning(&self) -> Result<PlanningConfig> {
        PlanningConfig::new(self.horizon, self.gamma).map_err(|e| match e {
            Error::Argument(m) => Error::Config(format!("--gamma: {m}")),
            other => other,
        })
    }

    fn class_or(&self, builtin: impl FnOnce() -> Result<Vec<EnvironmentModel>>) -> Result<Vec<EnvironmentModel>> {
        match &self.class_dir {
            Some(dir) => load_class_dir(dir),
            None => builtin(),
        }
    }

    fn output_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).map_err(|e| {
            Error::Config(format!("cannot create output directory {}: {e}", self.out.display()))
        })?;
        Ok(&self.out)
    }
}

/// Runs the command selected by `cfg.kind`; returns its JSON report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<serde_json::Value> {
    Ok(match cfg.kind {
        ExperimentKind::Converge => serde_json::to_value(cmd_converge(cfg)?)?,
        ExperimentKind::Chsh => serde_json::to_value(cmd_chsh(cfg)?)?,
        ExperimentKind::Ks => serde_json::to_value(cmd_ks(cfg)?)?,
        ExperimentKind::Value => serde_json::to_value(cmd_value(cfg)?)?,
        ExperimentKind::Run => serde_json::to_value(cmd_run(cfg)?)?,
    })
}

/// Independent per-episode seed: stream `index` of the master generator.
pub fn episode_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

fn truth_index(class: &[EnvironmentModel], name: &str) -> Result<usize> {
    class.iter().position(|m| m.name() == name).ok_or_else(|| {
        let names: Vec<&str> = class.iter().map(EnvironmentModel::name).collect();
        Error::Config(format!("truth `{name}` is not in the class {names:?}"))
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(csv_error)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Sample mean and standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
