use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{csv_error, csv_writer, write_json, ExperimentConfig};
use crate::env::{
    env_step, find_context_dependence, ks_uncolourability_check, make_ks_env, ContextDependence,
    History, KsSet,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub dim: usize,
    pub projectors: usize,
    pub contexts: Vec<Vec<usize>>,
    /// Largest `‖P_i P_j‖_max` within any context.
    pub max_orthogonality_residual: f64,
    /// Largest `‖Σ P_i − I‖_max` over contexts.
    pub max_completeness_residual: f64,
    pub colourable: bool,
    pub valid_assignments: u64,
    pub witness: Option<Vec<bool>>,
    pub context_dependence: Option<ContextDependence>,
    pub trajectory_cycles: usize,
}

/// Exhaustive colouring check plus a seeded measurement trajectory on the
/// contextual environment. Writes `ks_report.json` and `ks_trajectory.csv`.
pub fn cmd_ks(cfg: &ExperimentConfig) -> Result<KsReport> {
    cfg.validate()?;
    let set = match &cfg.ks_set {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            KsSet::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => KsSet::cabello18(),
    };
    let colouring = ks_uncolourability_check(&set)?;
    let (mut orth, mut completeness) = (0.0f64, 0.0f64);
    for ci in 0..set.contexts().len() {
        let (o, c) = set.context_residuals(ci);
        orth = orth.max(o);
        completeness = completeness.max(c);
    }
    let env = make_ks_env(&set, 0).map_err(|e| Error::Config(e.to_string()))?;
    let out = cfg.output_dir()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = env.initial_state().clone();
    let mut history = History::default();
    for _ in 0..cfg.cycles {
        let spec = &env.actions()[rng.random_range(0..env.actions().len())];
        let (percept, next) = env_step(&env, state, &spec.id, &mut rng)?;
        history.push(spec, percept);
        state = next;
    }
    let mut w = csv_writer(&out.join("ks_trajectory.csv"))?;
    w.write_record(["t", "action", "context", "outcome", "projector"]).map_err(csv_error)?;
    for (t, c) in history.cycles.iter().enumerate() {
        let k = c.outcome.expect("every context is an instrument");
        let label = &env.action(&c.action)?.instrument_ref().expect("instrument").labels()[k];
        w.write_record([
            (t + 1).to_string(),
            c.action.clone(),
            c.context.clone(),
            k.to_string(),
            label.clone(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;

    let report = KsReport {
        dim: set.dim(),
        projectors: set.projectors().len(),
        contexts: set.contexts().to_vec(),
        max_orthogonality_residual: orth,
        max_completeness_residual: completeness,
        colourable: colouring.colourable,
        valid_assignments: colouring.valid_assignments,
        witness: colouring.witness,
        context_dependence: find_context_dependence(&set)?,
        trajectory_cycles: cfg.cycles,
    };
    write_json(&out.join("ks_report.json"), &report)?;
    Ok(report)
}
