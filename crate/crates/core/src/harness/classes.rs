//! Built-in environment classes, also shipped as JSON under `classes/`.

use std::fs;
use std::path::Path;

use crate::env::{
    make_chsh_env, make_classical_env, make_lhv_env, BellState, ChshAngles, ClassicalAction,
    ClassicalSpec, EnvironmentFile, EnvironmentModel, KsSet, LocalStrategy, Mode,
};
use crate::error::Result;

pub const CONVERGENCE_TRUTH: &str = "coin-p050";
pub const CHSH_TRUTH: &str = "chsh-quantum";

/// Four episodic coins read by one action. The truth (`p = 0.5`, 2 bits)
/// sits among close neighbours so identification takes many cycles.
pub fn convergence_specs() -> Vec<ClassicalSpec> {
    [(0.5, 2), (0.55, 1), (0.6, 2), (0.65, 3)]
        .iter()
        .map(|&(p, bits)| ClassicalSpec::coin(format!("coin-p{:03}", (p * 100.0f64).round() as u32), p, bits))
        .collect()
}

pub fn convergence_class() -> Result<Vec<EnvironmentModel>> {
    convergence_specs().iter().map(make_classical_env).collect()
}

/// The quantum CHSH environment and three local hidden-variable rivals.
pub fn chsh_class() -> Result<Vec<EnvironmentModel>> {
    let optimal: Vec<LocalStrategy> = LocalStrategy::all()
        .into_iter()
        .filter(|s| s.win_rate() == 0.75)
        .collect();
    let uniform: Vec<(LocalStrategy, f64)> = LocalStrategy::all().into_iter().map(|s| (s, 1.0 / 16.0)).collect();
    let mix: Vec<(LocalStrategy, f64)> = optimal.iter().map(|&s| (s, 1.0 / 8.0)).collect();
    Ok(vec![
        make_chsh_env(ChshAngles::optimal(BellState::PsiMinus), BellState::PsiMinus, 2)?,
        make_lhv_env("lhv-deterministic", &[(optimal[0], 1.0)], 2)?,
        make_lhv_env("lhv-optimal-mix", &mix, 3)?,
        make_lhv_env("lhv-uniform", &uniform, 2)?,
    ])
}

/// Two persistent two-state chains with two actions and a shared reward
/// table: the commuting-limit test class.
pub fn commuting_specs() -> Vec<ClassicalSpec> {
    let rewards = [vec![0.0, 1.0], vec![0.5, 0.0]];
    let chain = |name: &str, initial: Vec<f64>, stay: Vec<Vec<f64>>, swap: Vec<Vec<f64>>, bits| ClassicalSpec {
        name: name.into(),
        initial,
        mode: Mode::Persistent,
        actions: vec![
            ClassicalAction {
                id: "stay".into(),
                transitions: stay,
                rewards: rewards[0].clone(),
            },
            ClassicalAction {
                id: "swap".into(),
                transitions: swap,
                rewards: rewards[1].clone(),
            },
        ],
        bits,
    };
    vec![
        chain(
            "chain-a",
            vec![0.6, 0.4],
            vec![vec![0.8, 0.2], vec![0.3, 0.7]],
            vec![vec![0.1, 0.9], vec![0.95, 0.05]],
            1,
        ),
        chain(
            "chain-b",
            vec![0.3, 0.7],
            vec![vec![0.5, 0.5], vec![0.9, 0.1]],
            vec![vec![0.6, 0.4], vec![0.2, 0.8]],
            2,
        ),
    ]
}

pub fn commuting_class() -> Result<Vec<EnvironmentModel>> {
    commuting_specs().iter().map(make_classical_env).collect()
}

/// One environment where action `a` always pays 1 and `b` never does.
pub fn deterministic_class() -> Result<Vec<EnvironmentModel>> {
    Ok(vec![make_classical_env(&ClassicalSpec::iid(
        "sure-reward",
        &["a", "b"],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        0,
    ))?])
}

fn write_class(dir: &Path, class: &[EnvironmentModel]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for m in class {
        let text = EnvironmentFile::from_model(m).to_json()?;
        fs::write(dir.join(format!("{}.json", m.name())), text + "\n")?;
    }
    Ok(())
}

/// Writes every built-in class under `root` (`converge/`, `chsh/`,
/// `commuting/`, `deterministic/`, `ks/cabello18.json`).
pub fn write_builtin_classes(root: &Path) -> Result<()> {
    write_class(&root.join("converge"), &convergence_class()?)?;
    write_class(&root.join("chsh"), &chsh_class()?)?;
    write_class(&root.join("commuting"), &commuting_class()?)?;
    write_class(&root.join("deterministic"), &deterministic_class()?)?;
    fs::create_dir_all(root.join("ks"))?;
    fs::write(root.join("ks/cabello18.json"), KsSet::cabello18().to_json()? + "\n")?;
    Ok(())
}
