//! Classical AIXI over tabular environments, written without any of the
//! operator machinery. It serves as the oracle for the commuting limit:
//! on diagonal classes the quantum agent must choose the same actions.

use crate::agent::argmax_lowest;
use crate::env::{ClassicalSpec, Mode};
use crate::error::{arg, Result};

/// Expectimax over the Bayes mixture `ξ = Σ_ν 2^{-ℓ(ν)} ν`, computed with
/// unnormalized joint masses `ξ(e_{1:t} ‖ a_{1:t})`.
#[derive(Debug, Clone)]
pub struct ClassicalAixi {
    specs: Vec<ClassicalSpec>,
    prior: Vec<f64>,
    horizon: usize,
    gamma: f64,
}

/// `(action index, outcome)` pairs.
pub type ClassicalHistory = [(usize, usize)];

impl ClassicalAixi {
    /// All specs must share action ids, outcome counts and reward tables.
    pub fn new(specs: Vec<ClassicalSpec>, horizon: usize, gamma: f64) -> Result<Self> {
        let Some(first) = specs.first() else {
            return arg("classical class is empty");
        };
        for s in &specs {
            if s.states() != first.states() || s.actions.len() != first.actions.len() {
                return arg(format!("`{}` does not share the class interface", s.name));
            }
            for (a, b) in s.actions.iter().zip(&first.actions) {
                if a.id != b.id || a.rewards != b.rewards {
                    return arg(format!("`{}` action `{}` differs from the class interface", s.name, a.id));
                }
            }
        }
        let prior = specs.iter().map(|s| 2f64.powi(-(s.bits as i32))).collect();
        Ok(Self {
            specs,
            prior,
            horizon,
            gamma,
        })
    }

    fn outcomes(&self) -> usize {
        self.specs[0].states()
    }

    fn actions(&self) -> usize {
        self.specs[0].actions.len()
    }

    fn reward(&self, a: usize, o: usize) -> f64 {
        self.specs[0].actions[a].rewards[o]
    }

    /// `ν(o_{1:t} ‖ a_{1:t})` for one environment.
    fn likelihood(spec: &ClassicalSpec, history: &ClassicalHistory) -> f64 {
        let mut belief = spec.initial.clone();
        let mut mass = 1.0;
        for &(a, o) in history {
            let t = &spec.actions[a].transitions;
            let p: f64 = belief.iter().enumerate().map(|(j, b)| b * t[j][o]).sum();
            mass *= p;
            if mass == 0.0 {
                return 0.0;
            }
            belief = match spec.mode {
                Mode::Episodic => spec.initial.clone(),
                Mode::Persistent => {
                    let mut e = vec![0.0; belief.len()];
                    e[o] = 1.0;
                    e
                }
            };
        }
        mass
    }

    /// Unnormalized mixture mass `ξ(h)`.
    pub fn mass(&self, history: &ClassicalHistory) -> f64 {
        self.specs
            .iter()
            .zip(&self.prior)
            .map(|(s, w)| w * Self::likelihood(s, history))
            .sum()
    }

    /// Posterior predictive `ξ(o | h, a)`.
    pub fn predictive(&self, history: &ClassicalHistory, a: usize) -> Vec<f64> {
        let base = self.mass(history);
        let mut ext = history.to_vec();
        ext.push((a, 0));
        (0..self.outcomes())
            .map(|o| {
                ext.last_mut().expect("pushed").1 = o;
                self.mass(&ext) / base
            })
            .collect()
    }

    /// Posterior weights `w_ν ∝ 2^{-ℓ(ν)} ν(h)`.
    pub fn posterior(&self, history: &ClassicalHistory) -> Vec<f64> {
        let raw: Vec<f64> = self
            .specs
            .iter()
            .zip(&self.prior)
            .map(|(s, w)| w * Self::likelihood(s, history))
            .collect();
        let z: f64 = raw.iter().sum();
        raw.iter().map(|x| x / z).collect()
    }

    /// `U(h, a, d) = Σ_o ξ(h a o)·r(a, o) + γ·max_{a'} U(h a o, a', d − 1)`.
    fn joint_q(&self, history: &mut Vec<(usize, usize)>, a: usize, depth: usize) -> f64 {
        let mut total = 0.0;
        for o in 0..self.outcomes() {
            history.push((a, o));
            let m = self.mass(history);
            if m > 0.0 {
                total += m * self.reward(a, o);
                if depth > 1 {
                    total += self.gamma * self.joint_value(history, depth - 1);
                }
            }
            history.pop();
        }
        total
    }

    fn joint_value(&self, history: &mut Vec<(usize, usize)>, depth: usize) -> f64 {
        (0..self.actions())
            .map(|a| self.joint_q(history, a, depth))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Normalized action values at `history` over the full horizon.
    pub fn q_values(&self, history: &ClassicalHistory) -> Vec<f64> {
        let base = self.mass(history);
        let mut h = history.to_vec();
        (0..self.actions())
            .map(|a| self.joint_q(&mut h, a, self.horizon) / base)
            .collect()
    }

    /// The expectimax action; ties go to the lowest index.
    pub fn action(&self, history: &ClassicalHistory) -> usize {
        argmax_lowest(&self.q_values(history))
    }

    pub fn action_id(&self, history: &ClassicalHistory) -> &str {
        &self.specs[0].actions[self.action(history)].id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_bandit_value() {
        let spec = ClassicalSpec::iid(
            "b",
            &["a", "b"],
            &[vec![0.1, 0.9], vec![0.9, 0.1]],
            &[vec![1.0, 0.0], vec![1.0, 0.0]],
            0,
        );
        let agent = ClassicalAixi::new(vec![spec], 3, 0.5).unwrap();
        let q = agent.q_values(&[]);
        assert!((q[1] - 0.9 * 1.75).abs() < 1e-12);
        assert_eq!(agent.action_id(&[]), "b");
    }

    #[test]
    fn two_coin_posterior() {
        let agent = ClassicalAixi::new(
            vec![ClassicalSpec::coin("hi", 0.9, 1), ClassicalSpec::coin("lo", 0.1, 1)],
            1,
            0.0,
        )
        .unwrap();
        let w = agent.posterior(&[(0, 0)]);
        assert!((w[0] - 0.9).abs() < 1e-12);
        assert!((agent.predictive(&[(0, 0)], 0)[0] - 0.82).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_rewards() {
        let mut b = ClassicalSpec::coin("b", 0.5, 1);
        b.actions[0].rewards = vec![0.0, 1.0];
        assert!(ClassicalAixi::new(vec![ClassicalSpec::coin("a", 0.5, 1), b], 1, 0.5).is_err());
    }
}
