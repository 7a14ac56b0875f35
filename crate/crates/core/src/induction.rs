//! Bayesian mixtures over a finite environment class: prior weights
//! `2^{-ℓ(Q)}`, branch-conditioned updates, predictive distributions and
//! the posterior divergence to the true state.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::channel::ZERO_PROB_CUTOFF;
use crate::env::{ActionPayload, EnvironmentModel};
use crate::error::{arg, Error, Result};
use crate::linalg::{
    c, relative_entropy, trace_distance, ComplexMatrix, DensityOperator, ONE, ZERO,
};

/// Posterior over a finite class. Weights are kept normalized and each
/// hypothesis carries its own normalized conditional state.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    hypotheses: Arc<[EnvironmentModel]>,
    prior: Vec<f64>,
    weights: Vec<f64>,
    cond_states: Vec<DensityOperator>,
    log_likelihoods: Vec<f64>,
}

/// Normalized `2^{-ℓ}` weights.
pub fn prior_weights(bits: &[u32]) -> Vec<f64> {
    let min = bits.iter().copied().min().unwrap_or(0);
    let raw: Vec<f64> = bits.iter().map(|&b| (-f64::from(b - min)).exp2()).collect();
    let z: f64 = raw.iter().sum();
    raw.iter().map(|w| w / z).collect()
}

pub fn mixture_init(class: Vec<EnvironmentModel>) -> Result<MixtureState> {
    let Some(first) = class.first() else {
        return arg("environment class is empty");
    };
    let dim = first.dim();
    if let Some(bad) = class.iter().find(|m| m.dim() != dim) {
        return arg(format!(
            "environment `{}` has dimension {}, class dimension is {dim}",
            bad.name(),
            bad.dim()
        ));
    }
    let bits: Vec<u32> = class.iter().map(EnvironmentModel::description_length).collect();
    let prior = prior_weights(&bits);
    Ok(MixtureState {
        weights: prior.clone(),
        cond_states: class.iter().map(|m| m.initial_state().clone()).collect(),
        log_likelihoods: vec![0.0; class.len()],
        prior,
        hypotheses: class.into(),
    })
}

impl MixtureState {
    pub fn hypotheses(&self) -> &[EnvironmentModel] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hypotheses[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn cond_states(&self) -> &[DensityOperator] {
        &self.cond_states
    }

    /// Accumulated `ln Pr_Q(e_{1:t} ‖ a_{1:t})`; `-∞` once eliminated.
    pub fn log_likelihoods(&self) -> &[f64] {
        &self.log_likelihoods
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.hypotheses.iter().position(|m| m.name() == name)
    }

    /// Action ids of the first hypothesis, in declaration order.
    pub fn action_ids(&self) -> Vec<String> {
        self.hypotheses[0].actions().iter().map(|a| a.id.clone()).collect()
    }

    /// Checks that every hypothesis offers `action` with the same kind and
    /// outcome count; returns the outcome count (0 for unitary actions).
    pub fn action_arity(&self, action: &str) -> Result<usize> {
        let first = self.hypotheses[0].action(action)?;
        for m in self.hypotheses.iter().skip(1) {
            let a = m.action(action)?;
            if a.is_instrument() != first.is_instrument() || a.outcomes() != first.outcomes() {
                return arg(format!(
                    "action `{action}` differs in kind or outcome count between `{}` and `{}`",
                    self.hypotheses[0].name(),
                    m.name()
                ));
            }
        }
        Ok(first.outcomes())
    }

    /// Per-hypothesis Born distributions of `action`; rows of eliminated
    /// hypotheses are all zero.
    pub fn branch_probabilities(&self, action: &str) -> Result<Vec<Vec<f64>>> {
        let n = self.action_arity(action)?;
        if n == 0 {
            return arg(format!("action `{action}` is unitary and has no outcome distribution"));
        }
        self.hypotheses
            .iter()
            .zip(&self.cond_states)
            .zip(&self.weights)
            .map(|((m, rho), &w)| {
                if w == 0.0 {
                    return Ok(vec![0.0; n]);
                }
                let instr = m.action(action)?.instrument_ref().expect("checked arity");
                instr.distribution(rho)
            })
            .collect()
    }

    /// `ξ(k | h, a) = Σ_Q w_Q Pr_Q(k | ρ_Q, a)`.
    pub fn predictive_distribution(&self, action: &str) -> Result<Vec<f64>> {
        let rows = self.branch_probabilities(action)?;
        let mut p = vec![0.0; rows[0].len()];
        for (row, w) in rows.iter().zip(&self.weights) {
            for (pk, x) in p.iter_mut().zip(row) {
                *pk += w * x;
            }
        }
        Ok(p)
    }

    /// Conditions on `(action, outcome)`. Unitary actions take `None` and
    /// only evolve the states.
    pub fn update(&self, action: &str, outcome: Option<usize>) -> Result<Self> {
        let n = self.action_arity(action)?;
        let mut next = self.clone();
        match outcome {
            None if n == 0 => {
                for (i, m) in self.hypotheses.iter().enumerate() {
                    if self.weights[i] > 0.0 {
                        next.cond_states[i] = m.evolve_unitary(&self.cond_states[i], action)?;
                    }
                }
                Ok(next)
            }
            Some(k) if k < n => {
                for (i, m) in self.hypotheses.iter().enumerate() {
                    if self.weights[i] == 0.0 {
                        continue;
                    }
                    let (p, post) = m.follow_branch(&self.cond_states[i], action, k)?;
                    match post {
                        Some(s) if p > ZERO_PROB_CUTOFF => {
                            next.weights[i] *= p;
                            next.log_likelihoods[i] += p.ln();
                            next.cond_states[i] = s;
                        }
                        _ => {
                            next.weights[i] = 0.0;
                            next.log_likelihoods[i] = f64::NEG_INFINITY;
                        }
                    }
                }
                let total: f64 = next.weights.iter().sum();
                if !(total > ZERO_PROB_CUTOFF) {
                    return Err(Error::ImpossibleObservation {
                        action: action.to_string(),
                        outcome: k,
                    });
                }
                for w in &mut next.weights {
                    *w /= total;
                }
                Ok(next)
            }
            Some(k) if n > 0 => arg(format!("outcome {k} out of range for action `{action}` ({n} outcomes)")),
            Some(_) => arg(format!("action `{action}` is unitary and produces no outcome")),
            None => arg(format!("action `{action}` is an instrument and needs an outcome")),
        }
    }

    /// `Σ_Q w_Q ρ_Q`.
    pub fn operator(&self) -> DensityOperator {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, rho) in self.weights.iter().zip(&self.cond_states) {
            if *w > 0.0 {
                m = m.add(&rho.matrix().scale(*w));
            }
        }
        DensityOperator::from_raw(m, self.cond_states[0].dims().to_vec())
    }
}

pub fn mixture_operator(mix: &MixtureState) -> DensityOperator {
    mix.operator()
}

pub fn predictive_distribution(mix: &MixtureState, action: &str) -> Result<Vec<f64>> {
    mix.predictive_distribution(action)
}

pub fn mixture_update(mix: &MixtureState, action: &str, outcome: Option<usize>) -> Result<MixtureState> {
    mix.update(action, outcome)
}

/// `D(ρ* ‖ Ξ)`; `+∞` when the truth leaves the mixture's support.
pub fn posterior_divergence(mix: &MixtureState, truth_state: &DensityOperator) -> Result<f64> {
    relative_entropy(truth_state, &mix.operator())
}

/// `½‖ρ* − Ξ‖₁`.
pub fn posterior_trace_distance(mix: &MixtureState, truth_state: &DensityOperator) -> Result<f64> {
    trace_distance(truth_state, &mix.operator())
}

/// Prior-dilution statistics for the true hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStatistics {
    /// `Σ_{Q≠Q*} 2^{-(ℓ_Q − ℓ*)}`
    pub g: f64,
    /// `ℓ* ln 2 + ln(1 + g)`
    pub d0_bound: f64,
    /// `ln(1 + g)`, the bound under the `c = 1/(1+g)` normalization.
    pub d0_cmax: f64,
    pub true_bits: u32,
}

impl GapStatistics {
    /// `d0_bound / t`.
    pub fn bound_at(&self, t: usize) -> f64 {
        self.d0_bound / t as f64
    }
}

pub fn gap_statistics(class: &[EnvironmentModel], true_index: usize) -> Result<GapStatistics> {
    let Some(truth) = class.get(true_index) else {
        return arg(format!("true index {true_index} out of range for {} hypotheses", class.len()));
    };
    let star = f64::from(truth.description_length());
    let g: f64 = class
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != true_index)
        .map(|(_, m)| (star - f64::from(m.description_length())).exp2())
        .sum();
    Ok(GapStatistics {
        g,
        d0_bound: star * std::f64::consts::LN_2 + g.ln_1p(),
        d0_cmax: g.ln_1p(),
        true_bits: truth.description_length(),
    })
}

/// Informational-completeness diagnostic: rank of the classical Fisher
/// information of the listed instruments' outcome statistics with respect
/// to traceless Hermitian perturbations of `state`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherDiagnostic {
    pub rank: usize,
    /// `d² − 1`: the rank of an informationally complete schedule.
    pub full_rank: usize,
    pub eigenvalues: Vec<f64>,
}

impl FisherDiagnostic {
    pub fn informationally_complete(&self) -> bool {
        self.rank == self.full_rank
    }
}

/// Orthonormal basis (Hilbert–Schmidt) of traceless Hermitian `d×d` matrices.
fn traceless_hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let mut sym = vec![ZERO; d * d];
            sym[i * d + j] = c(s, 0.0);
            sym[j * d + i] = c(s, 0.0);
            basis.push(ComplexMatrix::new(d, d, &sym).expect("finite"));
            let mut anti = vec![ZERO; d * d];
            anti[i * d + j] = c(0.0, -s);
            anti[j * d + i] = c(0.0, s);
            basis.push(ComplexMatrix::new(d, d, &anti).expect("finite"));
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![ZERO; d];
        for x in diag.iter_mut().take(l) {
            *x = ONE / norm;
        }
        diag[l] = c(-(l as f64) / norm, 0.0);
        basis.push(ComplexMatrix::from_diagonal(&diag));
    }
    basis
}

pub fn fisher_diagnostic(
    env: &EnvironmentModel,
    state: &DensityOperator,
    actions: &[&str],
) -> Result<FisherDiagnostic> {
    let d = env.dim();
    let basis = traceless_hermitian_basis(d);
    let n = basis.len();
    let mut fisher = DMatrix::<f64>::zeros(n, n);
    for id in actions {
        let ActionPayload::Instrument { instrument, .. } = &env.action(id)?.payload else {
            return arg(format!("action `{id}` is unitary and has no outcome statistics"));
        };
        let probs = instrument.distribution(state)?;
        for (branch, p) in instrument.branches().iter().zip(probs) {
            if p <= ZERO_PROB_CUTOFF {
                continue;
            }
            let effect = branch
                .kraus()
                .iter()
                .fold(ComplexMatrix::zeros(d, d), |acc, k| acc.add(&k.adjoint().mul(k)));
            let grad: Vec<f64> = basis.iter().map(|h| effect.mul(h).trace().re).collect();
            for i in 0..n {
                for j in 0..n {
                    fisher[(i, j)] += grad[i] * grad[j] / p;
                }
            }
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(fisher).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let rank = eigenvalues.iter().filter(|&&x| x > 1e-9 * top.max(1.0)).count();
    Ok(FisherDiagnostic {
        rank,
        full_rank: n,
        eigenvalues,
    })
}
