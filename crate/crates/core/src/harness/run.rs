use std::fs;

use serde::{Deserialize, Serialize};

use super::{truth_index, write_json, ExperimentConfig};
use crate::agent::{root_q_values, run_episode, AgentState, Policy, StepStats};
use crate::env::History;
use crate::error::{Error, Result};
use crate::harness::classes::deterministic_class;
use crate::induction::{mixture_init, MixtureState};

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HistoryEntry {
    pub action: String,
    pub outcome: Option<usize>,
}

/// A history to condition on: either `{"cycles": [...]}` or a `run`
/// report, whose `history` field has that shape.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum HistoryFile {
    Cycles { cycles: Vec<HistoryEntry> },
    Report { history: CyclesOnly },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CyclesOnly {
    pub cycles: Vec<HistoryEntry>,
}

impl HistoryFile {
    pub fn cycles(&self) -> &[HistoryEntry] {
        match self {
            HistoryFile::Cycles { cycles } | HistoryFile::Report { history: CyclesOnly { cycles } } => cycles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionValue {
    pub action: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueReport {
    pub hypotheses: Vec<String>,
    pub horizon: usize,
    pub gamma: f64,
    pub history_length: usize,
    pub weights: Vec<f64>,
    pub value: f64,
    pub action: String,
    pub q_values: Vec<ActionValue>,
}

fn condition(mix: MixtureState, entries: &[HistoryEntry]) -> Result<MixtureState> {
    let mut mix = mix;
    for (t, e) in entries.iter().enumerate() {
        mix = mix.update(&e.action, e.outcome).map_err(|err| match err {
            Error::Argument(m) => Error::Config(format!("history cycle {}: {m}", t + 1)),
            other => other,
        })?;
    }
    Ok(mix)
}

/// Expectimax value and chosen action for the class conditioned on an
/// optional history. Writes `value_report.json`.
pub fn cmd_value(cfg: &ExperimentConfig) -> Result<ValueReport> {
    let planning = cfg.planning()?;
    let class = cfg.class_or(deterministic_class)?;
    let hypotheses = class.iter().map(|m| m.name().to_string()).collect();
    let mut mix = mixture_init(class)?;
    let mut history_length = 0;
    if let Some(path) = &cfg.history {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: HistoryFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        history_length = file.cycles().len();
        mix = condition(mix, file.cycles())?;
    }
    let q = root_q_values(&mix, &planning)?;
    let values: Vec<f64> = q.iter().map(|(_, v)| *v).collect();
    let best = crate::agent::argmax_lowest(&values);
    let report = ValueReport {
        hypotheses,
        horizon: planning.horizon(),
        gamma: planning.gamma(),
        history_length,
        weights: mix.weights().to_vec(),
        value: values[best],
        action: q[best].0.clone(),
        q_values: q
            .into_iter()
            .map(|(action, value)| ActionValue { action, value })
            .collect(),
    };
    write_json(&cfg.output_dir()?.join("value_report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub truth: String,
    pub hypotheses: Vec<String>,
    pub policy: Policy,
    pub seed: u64,
    pub cycles: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub initial_divergence: f64,
    pub total_reward: f64,
    pub history: History,
    pub steps: Vec<StepStats>,
}

/// One episode against the truth (default: the first hypothesis). Writes
/// `run.json`.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let planning = cfg.planning()?;
    let class = cfg.class_or(deterministic_class)?;
    let truth_name = cfg.truth.clone().unwrap_or_else(|| class[0].name().to_string());
    let truth = class[truth_index(&class, &truth_name)?].clone();
    let hypotheses = class.iter().map(|m| m.name().to_string()).collect();
    let policy = cfg.policy.unwrap_or(Policy::Qaixi);
    let ep = run_episode(
        &truth,
        AgentState::new(mixture_init(class)?),
        &planning,
        policy,
        cfg.cycles,
        cfg.seed,
    )?;
    let report = RunReport {
        truth: truth_name,
        hypotheses,
        policy,
        seed: cfg.seed,
        cycles: cfg.cycles,
        horizon: planning.horizon(),
        gamma: planning.gamma(),
        initial_divergence: ep.initial_divergence,
        total_reward: ep.total_reward(),
        history: ep.history.clone(),
        steps: ep.steps,
    };
    write_json(&cfg.output_dir()?.join("run.json"), &report)?;
    Ok(report)
}
