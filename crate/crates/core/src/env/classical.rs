use crate::channel::{Instrument, KrausChannel};
use crate::env::{ActionSpec, EnvironmentModel, Mode};
use crate::error::{arg, Result};
use crate::linalg::{ComplexMatrix, DensityOperator};

/// A classical action: a stochastic transition of the register followed
/// by reading it out in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalAction {
    pub id: String,
    /// `transitions[j][k]` = Pr(outcome `k` | current state `j`).
    pub transitions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
}

/// Tables describing a classical (commuting) environment. The observed
/// outcome becomes the new register value.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSpec {
    pub name: String,
    pub initial: Vec<f64>,
    pub mode: Mode,
    pub actions: Vec<ClassicalAction>,
    pub bits: u32,
}

impl ClassicalSpec {
    /// Episodic coin `diag(p, 1 − p)` read out by action `observe`;
    /// outcome 0 pays reward 1.
    pub fn coin(name: impl Into<String>, p: f64, bits: u32) -> Self {
        Self {
            name: name.into(),
            initial: vec![p, 1.0 - p],
            mode: Mode::Episodic,
            actions: vec![ClassicalAction {
                id: "observe".into(),
                transitions: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                rewards: vec![1.0, 0.0],
            }],
            bits,
        }
    }

    /// Episodic environment whose outcome distribution depends only on the
    /// action: `dists[a]` with rewards `rewards[a]`.
    pub fn iid(
        name: impl Into<String>,
        ids: &[&str],
        dists: &[Vec<f64>],
        rewards: &[Vec<f64>],
        bits: u32,
    ) -> Self {
        let n = dists.first().map_or(0, Vec::len);
        let mut initial = vec![0.0; n];
        if n > 0 {
            initial[0] = 1.0;
        }
        Self {
            name: name.into(),
            initial,
            mode: Mode::Episodic,
            actions: ids
                .iter()
                .zip(dists)
                .zip(rewards)
                .map(|((id, d), r)| ClassicalAction {
                    id: (*id).into(),
                    transitions: vec![d.clone(); n],
                    rewards: r.clone(),
                })
                .collect(),
            bits,
        }
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return arg(format!("{what} has a negative or non-finite entry"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return arg(format!("{what} sums to {s}, expected 1"));
    }
    Ok(())
}

/// Embeds a classical environment as diagonal states and
/// computational-basis instruments. Branch `k` of an action has Kraus
/// operators `√T[j][k] |k⟩⟨j|`; an identity transition gives the plain
/// projector `|k⟩⟨k|`.
pub fn make_classical_env(spec: &ClassicalSpec) -> Result<EnvironmentModel> {
    let n = spec.states();
    if n == 0 {
        return arg("classical environment needs at least one state");
    }
    check_distribution(&spec.initial, "initial distribution")?;
    let mut actions = Vec::with_capacity(spec.actions.len());
    for a in &spec.actions {
        if a.transitions.len() != n || a.transitions.iter().any(|row| row.len() != n) {
            return arg(format!("action `{}` needs an {n}x{n} transition table", a.id));
        }
        for (j, row) in a.transitions.iter().enumerate() {
            check_distribution(row, &format!("action `{}` row {j}", a.id))?;
        }
        let mut branches = Vec::with_capacity(n);
        for k in 0..n {
            let mut kraus = Vec::new();
            for j in 0..n {
                let p = a.transitions[j][k];
                if p > 0.0 {
                    let mut entries = vec![0.0; n * n];
                    entries[k * n + j] = p.sqrt();
                    kraus.push(ComplexMatrix::from_real(n, n, &entries)?);
                }
            }
            if kraus.is_empty() {
                kraus.push(ComplexMatrix::zeros(n, n));
            }
            branches.push(KrausChannel::new(kraus)?);
        }
        let instrument = Instrument::new((0..n).map(|k| k.to_string()).collect(), branches)?;
        actions.push(ActionSpec::instrument(a.id.clone(), instrument, a.rewards.clone()));
    }
    EnvironmentModel::new(
        spec.name.clone(),
        spec.mode,
        DensityOperator::diagonal(&spec.initial)?,
        actions,
        spec.bits,
    )
}
