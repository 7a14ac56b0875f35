//! Exact finite-horizon expectimax over the mixture and the agent side
//! of the interaction loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{KrausChannel, ZERO_PROB_CUTOFF};
use crate::env::{env_step, sample_index, ActionPayload, ActionSpec, EnvironmentModel, History, Percept};
use crate::error::{arg, Error, Result};
use crate::induction::{posterior_divergence, posterior_trace_distance, MixtureState};
use crate::linalg::{partial_trace, ComplexMatrix, DensityOperator};

pub const MAX_HORIZON: usize = 6;
pub const MAX_BRANCHING: f64 = 1e7;
/// Q-values closer than this (relative to their magnitude) count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanningConfig {
    horizon: usize,
    gamma: f64,
}

impl PlanningConfig {
    pub fn new(horizon: usize, gamma: f64) -> Result<Self> {
        if horizon == 0 || horizon > MAX_HORIZON {
            return Err(Error::Capacity(format!(
                "horizon {horizon} outside 1..={MAX_HORIZON}"
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return arg(format!("discount {gamma} outside [0, 1)"));
        }
        Ok(Self { horizon, gamma })
    }

    /// Also checks the branching bound for a class with `actions` actions
    /// of at most `outcomes` outcomes each.
    pub fn for_class(horizon: usize, gamma: f64, actions: usize, outcomes: usize) -> Result<Self> {
        let cfg = Self::new(horizon, gamma)?;
        cfg.check_branching(actions, outcomes)?;
        Ok(cfg)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn check_branching(&self, actions: usize, outcomes: usize) -> Result<()> {
        let nodes = ((actions * outcomes.max(1)) as f64).powi(self.horizon as i32);
        if nodes > MAX_BRANCHING {
            return Err(Error::Capacity(format!(
                "expectimax tree ({actions} actions x {outcomes} outcomes)^{} = {nodes:.3e} exceeds {MAX_BRANCHING:.0e}",
                self.horizon
            )));
        }
        Ok(())
    }

    fn check_mixture(&self, mix: &MixtureState) -> Result<Vec<String>> {
        let ids = mix.action_ids();
        let mut outcomes = 0;
        for id in &ids {
            outcomes = outcomes.max(mix.action_arity(id)?);
        }
        self.check_branching(ids.len(), outcomes)?;
        Ok(ids)
    }
}

/// Mixture-expected immediate reward `Σ_Q w_Q Σ_k Pr_Q(k) r_Q(a, k)` and
/// the predictive distribution of an instrument action.
fn reward_and_predictive(mix: &MixtureState, action: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = mix.branch_probabilities(action)?;
    let n = rows[0].len();
    let mut pred = vec![0.0; n];
    let mut reward = vec![0.0; n];
    for ((row, w), m) in rows.iter().zip(mix.weights()).zip(mix.hypotheses()) {
        let spec = m.action(action)?;
        for k in 0..n {
            pred[k] += w * row[k];
            reward[k] += w * row[k] * spec.reward(Some(k));
        }
    }
    Ok((reward, pred))
}

fn q_value(mix: &MixtureState, action: &str, gamma: f64, ids: &[String], depth: usize) -> Result<f64> {
    if mix.action_arity(action)? == 0 {
        let next = mix.update(action, None)?;
        return Ok(gamma * node_value(&next, gamma, ids, depth - 1)?);
    }
    let (reward, pred) = reward_and_predictive(mix, action)?;
    let mut q = 0.0;
    for (k, &p) in pred.iter().enumerate() {
        if p <= ZERO_PROB_CUTOFF {
            continue;
        }
        q += reward[k];
        if depth > 1 && gamma > 0.0 {
            let next = mix.update(action, Some(k))?;
            q += gamma * p * node_value(&next, gamma, ids, depth - 1)?;
        }
    }
    Ok(q)
}

fn node_value(mix: &MixtureState, gamma: f64, ids: &[String], depth: usize) -> Result<f64> {
    if depth == 0 {
        return Ok(0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for id in ids {
        best = best.max(q_value(mix, id, gamma, ids, depth)?);
    }
    Ok(best)
}

/// Index of the first maximal entry, treating near-equal values as ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] + TIE_TOLERANCE * (1.0 + values[best].abs()) {
            best = i;
        }
    }
    best
}

/// Exact expectimax value of the mixture with `depth` cycles to go.
pub fn value(mix: &MixtureState, cfg: &PlanningConfig, depth: usize) -> Result<f64> {
    if depth > cfg.horizon {
        return arg(format!("depth {depth} exceeds horizon {}", cfg.horizon));
    }
    let ids = cfg.check_mixture(mix)?;
    node_value(mix, cfg.gamma, &ids, depth)
}

/// Root Q-values over the full horizon, in action declaration order. The
/// root subtrees are evaluated in parallel.
pub fn root_q_values(mix: &MixtureState, cfg: &PlanningConfig) -> Result<Vec<(String, f64)>> {
    let ids = cfg.check_mixture(mix)?;
    ids.par_iter()
        .map(|id| Ok((id.clone(), q_value(mix, id, cfg.gamma, &ids, cfg.horizon)?)))
        .collect()
}

/// The maximizing root action; ties go to the earliest declared action.
pub fn qaixi_policy(mix: &MixtureState, cfg: &PlanningConfig) -> Result<String> {
    let q = root_q_values(mix, cfg)?;
    let values: Vec<f64> = q.iter().map(|(_, v)| *v).collect();
    Ok(q[argmax_lowest(&values)].0.clone())
}

/// Expected discounted return over `depth` cycles when the true
/// environment is `truth` (currently in `state`) and the agent follows the
/// expectimax policy with its remaining horizon, updating `mix` on the way.
pub fn truth_rollout_value(
    truth: &EnvironmentModel,
    state: &DensityOperator,
    mix: &MixtureState,
    cfg: &PlanningConfig,
    depth: usize,
) -> Result<f64> {
    if depth > cfg.horizon {
        return arg(format!("depth {depth} exceeds horizon {}", cfg.horizon));
    }
    let ids = cfg.check_mixture(mix)?;
    rollout(truth, state, mix, cfg.gamma, &ids, depth)
}

fn rollout(
    truth: &EnvironmentModel,
    state: &DensityOperator,
    mix: &MixtureState,
    gamma: f64,
    ids: &[String],
    depth: usize,
) -> Result<f64> {
    if depth == 0 {
        return Ok(0.0);
    }
    let mut q = Vec::with_capacity(ids.len());
    for id in ids {
        q.push(q_value(mix, id, gamma, ids, depth)?);
    }
    let action = &ids[argmax_lowest(&q)];
    let spec = truth.action(action)?;
    match &spec.payload {
        ActionPayload::Unitary(u) => {
            let next = u.apply(state)?;
            Ok(gamma * rollout(truth, &next, &mix.update(action, None)?, gamma, ids, depth - 1)?)
        }
        ActionPayload::Instrument { instrument, rewards } => {
            let probs = instrument.distribution(state)?;
            let mut v = 0.0;
            for (k, &p) in probs.iter().enumerate() {
                if p <= ZERO_PROB_CUTOFF {
                    continue;
                }
                v += p * rewards[k];
                if depth > 1 && gamma > 0.0 {
                    let (_, next) = truth.follow_branch(state, action, k)?;
                    let next = next.expect("positive branch");
                    let tail = rollout(truth, &next, &mix.update(action, Some(k))?, gamma, ids, depth - 1)?;
                    v += gamma * p * tail;
                }
            }
            Ok(v)
        }
    }
}

/// Agent register, belief and internal update channel.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub internal: DensityOperator,
    pub mixture: MixtureState,
    /// Applied to the internal register every cycle; `None` is the identity.
    pub internal_update: Option<KrausChannel>,
}

impl AgentState {
    /// Agent with a trivial one-dimensional register.
    pub fn new(mixture: MixtureState) -> Self {
        Self {
            internal: DensityOperator::maximally_mixed(1),
            mixture,
            internal_update: None,
        }
    }

    pub fn with_internal(
        mixture: MixtureState,
        internal: DensityOperator,
        internal_update: Option<KrausChannel>,
    ) -> Result<Self> {
        if let Some(ch) = &internal_update {
            if ch.in_dim() != internal.dim() || ch.out_dim() != internal.dim() {
                return arg("internal update must act on the internal register");
            }
            if !ch.is_trace_preserving() {
                return arg("internal update must be trace preserving");
            }
        }
        Ok(Self {
            internal,
            mixture,
            internal_update,
        })
    }

    /// Register of dimension `d` starting in `|0⟩⟨0|` that fully dephases
    /// in the computational basis every cycle.
    pub fn decohering(mixture: MixtureState, d: usize) -> Result<Self> {
        Self::with_internal(mixture, DensityOperator::basis(d, 0)?, Some(KrausChannel::dephasing(d)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Qaixi,
    UniformRandom,
}

/// Statistics after cycle `t` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepStats {
    pub t: usize,
    pub action: String,
    pub outcome: Option<usize>,
    pub reward: f64,
    pub divergence: f64,
    pub trace_distance: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpisodeResult {
    pub history: History,
    /// Divergence to the truth before any cycle (`D₀`).
    pub initial_divergence: f64,
    pub initial_trace_distance: f64,
    pub initial_weights: Vec<f64>,
    pub steps: Vec<StepStats>,
    #[serde(skip)]
    pub agent: AgentState,
}

impl EpisodeResult {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

fn check_interface(truth: &EnvironmentModel, mix: &MixtureState) -> Result<()> {
    if truth.dim() != mix.dim() {
        return arg(format!(
            "truth `{}` has dimension {}, class has {}",
            truth.name(),
            truth.dim(),
            mix.dim()
        ));
    }
    for id in mix.action_ids() {
        let arity = mix.action_arity(&id)?;
        let a = truth.action(&id)?;
        if a.outcomes() != arity || a.is_instrument() != (arity > 0) {
            return arg(format!("truth `{}` disagrees with the class on action `{id}`", truth.name()));
        }
    }
    Ok(())
}

/// Runs `cycles` interaction cycles against `truth`. All randomness (the
/// policy's and the environment's) comes from one stream seeded by `seed`.
pub fn run_episode(
    truth: &EnvironmentModel,
    agent: AgentState,
    cfg: &PlanningConfig,
    policy: Policy,
    cycles: usize,
    seed: u64,
) -> Result<EpisodeResult> {
    check_interface(truth, &agent.mixture)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = agent.mixture.action_ids();
    let mut agent = agent;
    let mut state = truth.initial_state().clone();
    let initial_divergence = posterior_divergence(&agent.mixture, &state)?;
    let initial_trace_distance = posterior_trace_distance(&agent.mixture, &state)?;
    let initial_weights = agent.mixture.weights().to_vec();
    let mut history = History::default();
    let mut steps = Vec::with_capacity(cycles);
    for t in 1..=cycles {
        let action = match policy {
            Policy::Qaixi => qaixi_policy(&agent.mixture, cfg)?,
            Policy::UniformRandom => ids[rng.random_range(0..ids.len())].clone(),
        };
        let (percept, next) = env_step(truth, state, &action, &mut rng)?;
        state = next;
        agent.mixture = agent.mixture.update(&action, percept.outcome)?;
        if let Some(ch) = &agent.internal_update {
            agent.internal = ch.apply(&agent.internal)?;
        }
        history.push(truth.action(&action)?, percept);
        steps.push(StepStats {
            t,
            action,
            outcome: percept.outcome,
            reward: percept.reward,
            divergence: posterior_divergence(&agent.mixture, &state)?,
            trace_distance: posterior_trace_distance(&agent.mixture, &state)?,
            weights: agent.mixture.weights().to_vec(),
        });
    }
    Ok(EpisodeResult {
        history,
        initial_divergence,
        initial_trace_distance,
        initial_weights,
        steps,
        agent,
    })
}

/// Joint agent–environment state on `H_A ⊗ H_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    rho: DensityOperator,
    /// Set when the state is known to be a product `ρ_A ⊗ ρ_E`.
    pub separable_hint: bool,
}

impl JointState {
    pub fn new(rho: DensityOperator, dim_a: usize, dim_e: usize) -> Result<Self> {
        if dim_a * dim_e != rho.dim() {
            return arg(format!(
                "joint state of dimension {} cannot split as {dim_a} x {dim_e}",
                rho.dim()
            ));
        }
        Ok(Self {
            rho: rho.with_subsystems(vec![dim_a, dim_e])?,
            separable_hint: false,
        })
    }

    pub fn product(rho_a: &DensityOperator, rho_e: &DensityOperator) -> Self {
        let rho = DensityOperator::from_raw(
            rho_a.matrix().kron(rho_e.matrix()),
            vec![rho_a.dim(), rho_e.dim()],
        );
        Self {
            rho,
            separable_hint: true,
        }
    }

    pub fn state(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn dim_a(&self) -> usize {
        self.rho.dims()[0]
    }

    pub fn dim_e(&self) -> usize {
        self.rho.dims()[1]
    }

    pub fn reduced_agent(&self) -> Result<DensityOperator> {
        partial_trace(&self.rho, &[0])
    }

    pub fn reduced_env(&self) -> Result<DensityOperator> {
        partial_trace(&self.rho, &[1])
    }
}

/// `Pr(k) = Tr[(id_A ⊗ 𝓔_k) ρ_AE]` for an instrument action on `H_E`.
pub fn entangled_distribution(joint: &JointState, action: &ActionSpec) -> Result<Vec<f64>> {
    let Some(instr) = action.instrument_ref() else {
        return arg(format!("action `{}` has no outcomes", action.id));
    };
    check_joint(joint, instr.dim())?;
    instr.lift_left(joint.dim_a()).distribution(&joint.rho)
}

fn check_joint(joint: &JointState, dim_e: usize) -> Result<()> {
    if joint.dim_e() != dim_e {
        return arg(format!(
            "action acts on dimension {dim_e}, joint environment factor has {}",
            joint.dim_e()
        ));
    }
    Ok(())
}

/// One cycle of the general (possibly entangled) loop: the action acts as
/// `id_A ⊗ 𝓔` on the joint state.
pub fn entangled_step(
    joint: &JointState,
    action: &ActionSpec,
    rng: &mut impl Rng,
) -> Result<(Percept, JointState)> {
    match &action.payload {
        ActionPayload::Unitary(u) => {
            check_joint(joint, u.dim())?;
            let lifted = ComplexMatrix::identity(joint.dim_a()).kron(u.matrix());
            let rho = DensityOperator::from_raw(lifted.conjugate(joint.rho.matrix()), joint.rho.dims().to_vec());
            Ok((
                Percept {
                    outcome: None,
                    reward: 0.0,
                },
                JointState {
                    rho,
                    separable_hint: joint.separable_hint,
                },
            ))
        }
        ActionPayload::Instrument { instrument, rewards } => {
            check_joint(joint, instrument.dim())?;
            let lifted = instrument.lift_left(joint.dim_a());
            let probs = lifted.distribution(&joint.rho)?;
            let k = sample_index(&probs, rng);
            let post = lifted
                .branch_apply(k, &joint.rho)?
                .post_state
                .expect("sampled branch has positive probability");
            Ok((
                Percept {
                    outcome: Some(k),
                    reward: rewards[k],
                },
                JointState {
                    rho: post.with_subsystems(vec![joint.dim_a(), joint.dim_e()])?,
                    separable_hint: joint.separable_hint,
                },
            ))
        }
    }
}
