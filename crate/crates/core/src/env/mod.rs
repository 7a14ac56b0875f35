//! Environment models: an initial state on `H_E`, a table of actions
//! (unitaries or instruments) with rewards, and a declared description
//! length in bits used for the prior weight `2^{-ℓ}`.

mod chsh;
mod classical;
mod format;
mod ks;

pub use chsh::{
    best_lhv_win_rate, chsh_win, make_chsh_env, make_lhv_env, BellState, ChshAngles,
    LocalStrategy, CHSH_ACTIONS, CHSH_OUTCOMES,
};
pub use classical::{make_classical_env, ClassicalAction, ClassicalSpec};
pub use format::{load_class_dir, ActionFile, ActionKind, EnvironmentFile};
pub use ks::{
    find_context_dependence, ks_uncolourability_check, make_ks_env, sequential_click_probability,
    Colourability, ContextDependence, KsSet, MAX_BRUTE_FORCE_PROJECTORS,
};

use rand::Rng;
use serde::Serialize;

use crate::channel::{Instrument, UnitaryAction, Validate, ZERO_PROB_CUTOFF};
use crate::error::{arg, Result};
use crate::linalg::DensityOperator;

/// Whether an environment re-prepares its state every measured cycle or
/// carries one register across cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Episodic,
    Persistent,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionPayload {
    Unitary(UnitaryAction),
    /// `rewards[k]` is paid on outcome `k`.
    Instrument { instrument: Instrument, rewards: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    pub id: String,
    /// Describes the full instrument applied; recorded in histories.
    pub context: String,
    pub payload: ActionPayload,
}

impl ActionSpec {
    pub fn unitary(id: impl Into<String>, u: UnitaryAction) -> Self {
        let id = id.into();
        Self {
            context: format!("unitary:{id}"),
            id,
            payload: ActionPayload::Unitary(u),
        }
    }

    pub fn instrument(id: impl Into<String>, instrument: Instrument, rewards: Vec<f64>) -> Self {
        let id = id.into();
        Self {
            context: format!("instrument:{id}"),
            id,
            payload: ActionPayload::Instrument { instrument, rewards },
        }
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }

    pub fn is_instrument(&self) -> bool {
        matches!(self.payload, ActionPayload::Instrument { .. })
    }

    pub fn instrument_ref(&self) -> Option<&Instrument> {
        match &self.payload {
            ActionPayload::Instrument { instrument, .. } => Some(instrument),
            ActionPayload::Unitary(_) => None,
        }
    }

    /// Number of outcomes; unitary actions have none.
    pub fn outcomes(&self) -> usize {
        self.instrument_ref().map_or(0, Instrument::outcomes)
    }

    /// Reward for outcome `k`; unitary actions pay 0.
    pub fn reward(&self, k: Option<usize>) -> f64 {
        match (&self.payload, k) {
            (ActionPayload::Instrument { rewards, .. }, Some(k)) => rewards[k],
            _ => 0.0,
        }
    }

    fn dim(&self) -> usize {
        match &self.payload {
            ActionPayload::Unitary(u) => u.dim(),
            ActionPayload::Instrument { instrument, .. } => instrument.dim(),
        }
    }
}

/// One hypothesis `Q` of the environment class.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentModel {
    name: String,
    mode: Mode,
    initial_state: DensityOperator,
    actions: Vec<ActionSpec>,
    description_length: u32,
}

impl EnvironmentModel {
    pub fn new(
        name: impl Into<String>,
        mode: Mode,
        initial_state: DensityOperator,
        actions: Vec<ActionSpec>,
        description_length: u32,
    ) -> Result<Self> {
        let name = name.into();
        let dim = initial_state.dim();
        if (initial_state.trace() - 1.0).abs() > crate::linalg::STATE_TOL {
            return arg(format!("environment `{name}`: initial state must have unit trace"));
        }
        if actions.is_empty() {
            return arg(format!("environment `{name}` has no actions"));
        }
        for (i, a) in actions.iter().enumerate() {
            if actions[..i].iter().any(|b| b.id == a.id) {
                return arg(format!("environment `{name}`: duplicate action id `{}`", a.id));
            }
            if a.dim() != dim {
                return arg(format!(
                    "environment `{name}`: action `{}` acts on dimension {}, expected {dim}",
                    a.id,
                    a.dim()
                ));
            }
            let report = match &a.payload {
                ActionPayload::Unitary(u) => u.validate(),
                ActionPayload::Instrument { instrument, rewards } => {
                    if rewards.len() != instrument.outcomes() {
                        return arg(format!(
                            "environment `{name}`: action `{}` has {} rewards for {} outcomes",
                            a.id,
                            rewards.len(),
                            instrument.outcomes()
                        ));
                    }
                    if rewards.iter().any(|r| !(0.0..=1.0).contains(r)) {
                        return arg(format!(
                            "environment `{name}`: action `{}` has a reward outside [0, 1]",
                            a.id
                        ));
                    }
                    instrument.validate()
                }
            };
            if let Some(f) = report.failures.first() {
                return arg(format!(
                    "environment `{name}`: action `{}` failed validation: {}",
                    a.id, f.detail
                ));
            }
        }
        Ok(Self {
            name,
            mode,
            initial_state,
            actions,
            description_length,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial_state
    }

    pub fn actions(&self) -> &[ActionSpec] {
        &self.actions
    }

    pub fn description_length(&self) -> u32 {
        self.description_length
    }

    /// Copy with a different description length.
    pub fn with_description_length(mut self, bits: u32) -> Self {
        self.description_length = bits;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn action(&self, id: &str) -> Result<&ActionSpec> {
        self.actions
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| crate::Error::Argument(format!("environment `{}` has no action `{id}`", self.name)))
    }

    /// State after the register has been measured into `post`.
    fn after_measurement(&self, post: DensityOperator) -> DensityOperator {
        match self.mode {
            Mode::Episodic => self.initial_state.clone(),
            Mode::Persistent => post,
        }
    }

    /// Applies a unitary action deterministically.
    pub fn evolve_unitary(&self, state: &DensityOperator, action: &str) -> Result<DensityOperator> {
        match &self.action(action)?.payload {
            ActionPayload::Unitary(u) => u.apply(state),
            ActionPayload::Instrument { .. } => arg(format!("action `{action}` is an instrument")),
        }
    }

    /// Follows branch `k` of an instrument action. Returns the branch
    /// probability and, when it is non-zero, the next state (re-prepared
    /// in episodic mode).
    pub fn follow_branch(
        &self,
        state: &DensityOperator,
        action: &str,
        k: usize,
    ) -> Result<(f64, Option<DensityOperator>)> {
        let spec = self.action(action)?;
        let Some(instrument) = spec.instrument_ref() else {
            return arg(format!("action `{action}` has no outcomes"));
        };
        let b = instrument.branch_apply(k, state)?;
        Ok((b.prob, b.post_state.map(|s| self.after_measurement(s))))
    }
}

/// What the agent perceives after one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percept {
    /// `None` for unitary (non-measurement) cycles.
    pub outcome: Option<usize>,
    pub reward: f64,
}

/// One interaction cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cycle {
    pub action: String,
    pub context: String,
    pub outcome: Option<usize>,
    pub reward: f64,
}

/// Chronological record of cycles.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct History {
    pub cycles: Vec<Cycle>,
}

impl History {
    pub fn push(&mut self, spec: &ActionSpec, percept: Percept) {
        self.cycles.push(Cycle {
            action: spec.id.clone(),
            context: spec.context.clone(),
            outcome: percept.outcome,
            reward: percept.reward,
        });
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// Draws an index from a (possibly sub-normalized) probability vector,
/// skipping entries at or below the zero-probability cutoff.
pub fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = probs.iter().filter(|&&p| p > ZERO_PROB_CUTOFF).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= ZERO_PROB_CUTOFF {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Runs one cycle of the environment. The state is consumed: the
/// pre-measurement instance is not available afterwards.
pub fn env_step(
    env: &EnvironmentModel,
    state: DensityOperator,
    action: &str,
    rng: &mut impl Rng,
) -> Result<(Percept, DensityOperator)> {
    if state.dim() != env.dim() {
        return arg(format!(
            "state dimension {} does not match environment dimension {}",
            state.dim(),
            env.dim()
        ));
    }
    let spec = env.action(action)?;
    match &spec.payload {
        ActionPayload::Unitary(u) => Ok((
            Percept {
                outcome: None,
                reward: 0.0,
            },
            u.apply(&state)?,
        )),
        ActionPayload::Instrument { instrument, rewards } => {
            let probs = instrument.distribution(&state)?;
            let k = sample_index(&probs, rng);
            let post = instrument
                .branch_apply(k, &state)?
                .post_state
                .expect("sampled branch has positive probability");
            Ok((
                Percept {
                    outcome: Some(k),
                    reward: rewards[k],
                },
                env.after_measurement(post),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coin(p: f64) -> EnvironmentModel {
        make_classical_env(&ClassicalSpec::coin("coin", p, 1)).unwrap()
    }

    #[test]
    fn deterministic_env_returns_prepared_label() {
        let env = coin(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = env.initial_state().clone();
        for _ in 0..20 {
            let (p, next) = env_step(&env, state, "observe", &mut rng).unwrap();
            assert_eq!(p.outcome, Some(1));
            state = next;
        }
    }

    #[test]
    fn biased_coin_frequency() {
        let env = coin(0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut state = env.initial_state().clone();
        let mut zeros = 0;
        let n = 10_000;
        for _ in 0..n {
            let (p, next) = env_step(&env, state, "observe", &mut rng).unwrap();
            zeros += usize::from(p.outcome == Some(0));
            state = next;
        }
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.9).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn unitary_then_measure() {
        let zero = DensityOperator::basis(2, 0).unwrap();
        let env = EnvironmentModel::new(
            "flip",
            Mode::Persistent,
            zero,
            vec![
                ActionSpec::unitary("x", UnitaryAction::pauli_x()),
                ActionSpec::instrument("z", Instrument::computational_basis(2), vec![0.0, 1.0]),
            ],
            1,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (p, s) = env_step(&env, env.initial_state().clone(), "x", &mut rng).unwrap();
        assert_eq!(p, Percept { outcome: None, reward: 0.0 });
        let (p, _) = env_step(&env, s, "z", &mut rng).unwrap();
        assert_eq!(p.outcome, Some(1));
        assert_eq!(p.reward, 1.0);
        assert!(env_step(&env, env.initial_state().clone(), "y", &mut rng).is_err());
    }

    #[test]
    fn env_step_is_reproducible() {
        let env = coin(0.5);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = env.initial_state().clone();
            let mut out = Vec::new();
            for _ in 0..64 {
                let (p, n) = env_step(&env, s, "observe", &mut rng).unwrap();
                out.push(p.outcome.unwrap());
                s = n;
            }
            out
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn model_validation() {
        let zero = DensityOperator::basis(2, 0).unwrap();
        let basis = Instrument::computational_basis(2);
        let bad_reward = EnvironmentModel::new(
            "r",
            Mode::Episodic,
            zero.clone(),
            vec![ActionSpec::instrument("m", basis.clone(), vec![0.0, 2.0])],
            0,
        );
        assert!(bad_reward.is_err());
        let missing = EnvironmentModel::new(
            "r",
            Mode::Episodic,
            zero.clone(),
            vec![ActionSpec::instrument("m", basis.clone(), vec![0.0])],
            0,
        );
        assert!(missing.is_err());
        let p0 = DensityOperator::basis(2, 0).unwrap().matrix().clone();
        let incomplete = Instrument::projective(vec![p0]).unwrap();
        let bad_instr = EnvironmentModel::new(
            "r",
            Mode::Episodic,
            zero.clone(),
            vec![ActionSpec::instrument("m", incomplete, vec![0.0])],
            0,
        );
        assert!(bad_instr.is_err());
        let wrong_dim = EnvironmentModel::new(
            "r",
            Mode::Episodic,
            zero,
            vec![ActionSpec::instrument("m", Instrument::computational_basis(3), vec![0.0; 3])],
            0,
        );
        assert!(wrong_dim.is_err());
    }

    #[test]
    fn sample_index_skips_zero_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
    }
}
