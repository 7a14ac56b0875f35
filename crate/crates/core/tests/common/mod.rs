#![allow(dead_code)]

use qaixi::channel::{Instrument, KrausChannel};
use qaixi::env::{
    make_classical_env, ActionSpec, ClassicalAction, ClassicalSpec, EnvironmentModel, Mode,
};
use qaixi::linalg::{ComplexMatrix, DensityOperator};
use qaixi::random::{random_density, random_instrument};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random full-rank state with trace `scale`.
pub fn semi_density(d: usize, scale: f64, rng: &mut impl Rng) -> DensityOperator {
    let rho = random_density(d, rng);
    DensityOperator::new(rho.matrix().scale(scale)).unwrap()
}

/// `Σ_j Tr(K_j ρ K_j†)` straight from the Kraus matrices.
pub fn branch_trace(branch: &KrausChannel, rho: &DensityOperator) -> f64 {
    branch
        .kraus()
        .iter()
        .map(|k| k.mul(rho.matrix()).mul(&k.adjoint()).trace().re)
        .sum()
}

/// Reward tables shared by every hypothesis of a random class.
pub fn random_rewards(actions: usize, outcomes: usize, max: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..actions)
        .map(|_| (0..outcomes).map(|_| rng.random::<f64>() * max).collect())
        .collect()
}

/// Environment with a random initial state and random Stinespring
/// instruments as actions `a0, a1, ...`.
pub fn random_quantum_env(
    name: &str,
    bits: u32,
    d: usize,
    mode: Mode,
    rewards: &[Vec<f64>],
    rng: &mut impl Rng,
) -> EnvironmentModel {
    let actions = rewards
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let instr: Instrument = random_instrument(d, r.len(), 2, rng);
            ActionSpec::instrument(format!("a{i}"), instr, r.clone())
        })
        .collect();
    EnvironmentModel::new(name, mode, random_density(d, rng), actions, bits).unwrap()
}

pub fn random_quantum_class(
    n: usize,
    d: usize,
    actions: usize,
    outcomes: usize,
    rng: &mut impl Rng,
) -> Vec<EnvironmentModel> {
    let rewards = random_rewards(actions, outcomes, 1.0, rng);
    (0..n)
        .map(|i| {
            let mode = if rng.random::<bool>() {
                Mode::Persistent
            } else {
                Mode::Episodic
            };
            let bits = rng.random_range(0..4);
            random_quantum_env(&format!("q{i}"), bits, d, mode, &rewards, rng)
        })
        .collect()
}

fn random_distribution(n: usize, floor: f64, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| floor + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// Random classical (diagonal) environments sharing actions and rewards.
pub fn random_classical_specs(
    n: usize,
    states: usize,
    actions: usize,
    rng: &mut impl Rng,
) -> Vec<ClassicalSpec> {
    let rewards = random_rewards(actions, states, 1.0, rng);
    (0..n)
        .map(|i| ClassicalSpec {
            name: format!("c{i}"),
            initial: random_distribution(states, 0.05, rng),
            mode: if rng.random::<bool>() {
                Mode::Persistent
            } else {
                Mode::Episodic
            },
            actions: rewards
                .iter()
                .enumerate()
                .map(|(a, r)| ClassicalAction {
                    id: format!("a{a}"),
                    transitions: (0..states)
                        .map(|_| random_distribution(states, 0.05, rng))
                        .collect(),
                    rewards: r.clone(),
                })
                .collect(),
            bits: rng.random_range(0..4),
        })
        .collect()
}

pub fn embed(specs: &[ClassicalSpec]) -> Vec<EnvironmentModel> {
    specs.iter().map(|s| make_classical_env(s).unwrap()).collect()
}

/// Every sequence of `len` (action, outcome) pairs.
pub fn all_histories(actions: usize, outcomes: usize, len: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|h| {
                (0..actions).flat_map(move |a| {
                    let h = h.clone();
                    (0..outcomes).map(move |o| {
                        let mut e = h.clone();
                        e.push((a, o));
                        e
                    })
                })
            })
            .collect();
    }
    out
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.sub(b).max_abs()
}
